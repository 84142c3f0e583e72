use clap::Parser;
use overhang::cli::{run, Cli, Streams};

fn main() {
    let cli = Cli::parse();
    let (mut stdin, mut out, mut err) = (std::io::stdin(), std::io::stdout(), std::io::stderr());
    let code = run(
        cli,
        &mut Streams {
            stdin: &mut stdin,
            out: &mut out,
            err: &mut err,
        },
    );
    std::process::exit(code);
}
