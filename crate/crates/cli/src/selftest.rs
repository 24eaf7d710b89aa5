use std::time::Instant;

use enlarge_core::progressive::{optional_decomposition, optional_decomposition_tampered};

use crate::suites::{
    initial_lift_suite, initial_suite, invariance_suite, na1_oracle_suite, progressive_lift_suite, progressive_suite,
    Corpus, Tally, COVERAGE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    Quick,
    Full,
}

/// Case counts per suite.
#[derive(Debug, Clone, Copy)]
pub struct Plan {
    pub spaces: Corpus,
    pub lifts: Corpus,
    pub invariance: Corpus,
    pub densities: usize,
    pub oracle: Corpus,
    pub negative_control: Corpus,
}

pub const SEED: u64 = 0x5eed;

impl Plan {
    pub fn for_scale(scale: Scale) -> Plan {
        let c = |cases, max_atoms, max_horizon| Corpus { seed: SEED, cases, max_atoms, max_horizon };
        match scale {
            Scale::Quick => Plan {
                spaces: c(200, 16, 5),
                lifts: c(200, 12, 4),
                invariance: c(40, 12, 4),
                densities: 20,
                oracle: c(200, 6, 3),
                negative_control: c(50, 12, 4),
            },
            Scale::Full => Plan {
                spaces: c(1000, 64, 8),
                lifts: c(500, 24, 6),
                invariance: c(200, 24, 6),
                densities: 200,
                oracle: c(1000, 6, 3),
                negative_control: c(200, 16, 5),
            },
        }
    }
}

fn print_tally(title: &str, tally: &Tally, secs: f64) {
    println!("== {title} ({secs:.2}s)");
    for (name, t) in &tally.0 {
        let status = if t.ok() { "ok  " } else { "FAIL" };
        print!("  {status} {name}: {} passed, {} failed", t.passed, t.failed);
        if let Some((case, detail)) = &t.first_failure {
            print!(" (first at case {case}: {detail})");
        }
        println!();
    }
}

/// Runs every suite and prints a coverage map. With `tampered`, the
/// progressive suite uses a deliberately broken decomposition. Returns
/// whether everything passed.
pub fn run(scale: Scale, tampered: bool) -> bool {
    let plan = Plan::for_scale(scale);
    let decompose = if tampered { optional_decomposition_tampered } else { optional_decomposition };
    let mut all = Tally::default();
    let mut ok = true;

    let suites: Vec<(&str, Box<dyn Fn() -> Tally>)> = vec![
        ("progressive identities", Box::new(move || progressive_suite(plan.spaces, decompose))),
        ("initial identities", Box::new(move || initial_suite(plan.spaces, 4))),
        ("progressive deflator lift", Box::new(move || progressive_lift_suite(plan.lifts))),
        ("initial deflator lift", Box::new(move || initial_lift_suite(plan.lifts, 3))),
        ("measure invariance", Box::new(move || invariance_suite(plan.invariance, plan.densities, 3))),
        ("NA1 kernel vs exhaustive oracle", Box::new(move || na1_oracle_suite(plan.oracle))),
    ];
    for (title, suite) in suites {
        let start = Instant::now();
        let tally = suite();
        print_tally(title, &tally, start.elapsed().as_secs_f64());
        ok &= tally.ok();
        all = all.merge(tally);
    }

    // The identity suite must notice a broken decomposition.
    let start = Instant::now();
    let control = progressive_suite(plan.negative_control, optional_decomposition_tampered);
    let caught = control
        .get("progressive.z_equals_l_times_one_minus_k")
        .is_some_and(|t| t.failed > 0);
    println!(
        "== negative control ({:.2}s)\n  {} tampered decomposition {} by z_equals_l_times_one_minus_k ({} failing cases)",
        start.elapsed().as_secs_f64(),
        if caught { "ok  " } else { "FAIL" },
        if caught { "caught" } else { "missed" },
        control.get("progressive.z_equals_l_times_one_minus_k").map_or(0, |t| t.failed),
    );
    ok &= caught;

    println!("== coverage");
    for (result, checks) in COVERAGE {
        let (passed, failed) = checks.iter().fold((0, 0), |(p, f), c| {
            all.get(c).map_or((p, f), |t| (p + t.passed, f + t.failed))
        });
        let missing: Vec<&str> = checks.iter().copied().filter(|c| all.get(c).is_none()).collect();
        let status = if failed == 0 && missing.is_empty() { "ok  " } else { "FAIL" };
        ok &= status == "ok  ";
        print!("  {status} {result}: {passed} checks passed, {failed} failed [{}]", checks.join(", "));
        if !missing.is_empty() {
            print!(" missing: {}", missing.join(", "));
        }
        println!();
    }
    println!("selftest {}", if ok { "passed" } else { "FAILED" });
    ok
}
