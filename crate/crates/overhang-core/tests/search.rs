use overhang_core::balance::{balance_lp_of, is_balanced, Mode};
use overhang_core::model::{contacts_of, exact_overhang, support_partition};
use overhang_core::scalar::{rational_int, Rational, Scalar};
use overhang_core::search::*;
use overhang_core::shield::convert;
use overhang_core::spinal::{optimize, SpinalOptions};

fn d4() -> f64 {
    (15.0 - 4.0 * 2f64.sqrt()) / 8.0
}

#[test]
fn exhaustive_small_values() {
    let opts = SearchOptions::default();
    let (d1, _, _) = exhaustive_d(1, opts).unwrap();
    assert!((d1 - 0.5).abs() < 1e-9);
    let (d3, s3, _) = exhaustive_d(3, opts).unwrap();
    assert!((d3 - 1.0).abs() < 1e-6, "{d3}");
    assert!(is_balanced(&s3, Mode::Float { tol: 1e-7 }).unwrap().balanced);
    let (d4v, _, _) = exhaustive_d(4, opts).unwrap();
    assert!((d4v - d4()).abs() < 1e-4, "{d4v}");
}

#[test]
fn exhaustive_stays_within_spinal_bound() {
    let opts = SearchOptions::default();
    for n in 1..=5usize {
        let (d, stack, _) = exhaustive_d(n, opts).unwrap();
        let best = optimize(n as f64, SpinalOptions::default()).unwrap();
        assert!(d <= best.value + 1e-9, "n={n}: {d} > {}", best.value);
        // the optimum found is itself spinal
        let part = support_partition(&stack).unwrap();
        let mut levels: Vec<u32> = part.support.iter().map(|&b| stack.blocks[b].level).collect();
        levels.sort();
        levels.dedup();
        assert_eq!(levels.len(), part.support.len(), "n={n}");
        let conv = convert(&best.design).unwrap();
        if conv.success {
            assert!((d - best.value).abs() < 1e-6, "n={n}: {d} vs {}", best.value);
        }
        println!("n={n} D={d} S*={} realizable={}", best.value, conv.success);
    }
}

#[test]
fn symmetric_overhang_ten() {
    let o = local_search_brickwall(&rational_int(10), true, None).unwrap();
    println!("sym {} rows {} blocks {}", o.weight, o.profile.levels(), o.profile.blocks());
    assert!((o.weight - 1151.76).abs() / 1151.76 < 0.02);
    assert!(o.trace.windows(2).all(|w| w[1] < w[0]));
    for q in neighbors(&o.profile) {
        assert!(profile_weight(&q, 20) >= o.weight - 1e-9);
    }
}

#[test]
fn loaded_optimum_forces_are_unique() {
    let o = local_search_brickwall(&rational_int(4), true, None).unwrap();
    let a = propagate_well_behaved::<Rational>(&o.profile).unwrap();
    let w = a.min_weight().unwrap();
    println!("overhang 4 loaded: {} blocks, weight {}", o.profile.blocks(), w.to_float());
    let stack = a.loaded_stack(&w);
    assert_eq!(witness_is_unique(&stack, 1e-7).unwrap(), Some(true));
    let (_, d4stack, _) = exhaustive_d(4, SearchOptions::default()).unwrap();
    assert_eq!(witness_is_unique(&d4stack, 1e-6).unwrap(), Some(true));
}

#[test]
fn asymmetric_overhang_ten() {
    let (sym, asym) = asymmetric_from_symmetric(&rational_int(10)).unwrap();
    println!("asym {} sym {}", asym.weight, sym.weight);
    assert!(asym.weight < sym.weight);
    assert!((asym.weight - 1128.84).abs() / 1128.84 < 0.02);
    let a = propagate_well_behaved::<Rational>(&asym.profile).unwrap();
    let w = a.min_weight().unwrap();
    assert!((w.to_float() - asym.weight).abs() < 1e-6);
    let stack = a.loaded_stack(&w);
    let x = a.balance_witness(&w).unwrap();
    let g = stack.exact_geometry().unwrap();
    let lp = balance_lp_of(&g, &contacts_of(&g).unwrap());
    assert!(lp.residuals(&x).iter().all(|r| r.is_negligible()));
    assert!(x.iter().all(|v| !v.is_neg()));
}

#[test]
fn bare_stack_with_overhang_four() {
    let o = search_unloaded(&rational_int(4), UnloadedOptions::default()).unwrap();
    println!("{:?} {} {}", o.profile.widths(), o.profile.blocks(), o.missing);
    assert!(o.exact);
    assert!(o.profile.blocks() <= 95);
    let stack = o.profile.stack();
    assert_eq!(exact_overhang(&stack).unwrap(), rational_int(4));
}

#[test]
#[ignore = "long-running: overhang-50 brick-wall search"]
fn symmetric_overhang_fifty() {
    let o = local_search_brickwall(&rational_int(50), true, None).unwrap();
    println!("overhang 50: weight {}, {} levels", o.weight, o.profile.levels());
    assert!((o.weight - 115_467.0).abs() <= 0.02 * 115_467.0);
}
