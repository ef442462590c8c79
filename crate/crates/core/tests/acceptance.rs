//! Acceptance suite: one test per shipped guarantee. Each test prints a
//! single `ACCEPTANCE <n> <slug>: PASS|FAIL` line before asserting, so the
//! whole gate reads as eight lines under
//! `cargo test -p interact-rd --test acceptance -- --nocapture`
//! (the harness always shows the line for a failing test).

use interact_rd::discrete::{
    binary_entropy, doubly_symmetric_binary, min_rates_search, DecoderMode, Targets,
};
use interact_rd::gaussian::{achieved_point, GaussianPair, LinearFn, TestChannels};
use interact_rd::oneway::{one_way_cr_rate, ratio_curve};
use interact_rd::region::{
    min_sum_rate, sum_rate_bounds, verify_achievability, DistortionPair, KappaVec, MinSumConfig,
    VerifyConfig, Weights,
};
use interact_rd::sim::{simulate_indicator, simulate_linear};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(n: u32, slug: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {n} {slug}: {verdict} ({detail})");
    assert!(pass, "acceptance criterion {n} ({slug}) failed: {detail}");
}

fn draw_coef(rng: &mut ChaCha8Rng) -> f64 {
    let mag = rng.gen_range(0.3f64..1.5);
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// On the identity-function benchmark source (both variances 4), the
/// interactive-to-one-shot rate ratio over the default 64-point distortion
/// grid stays inside `[0, 1]`, decreases monotonically over the upper half
/// of the grid, and ends below 0.2.
#[test]
fn criterion_1_ratio_curve_shape() {
    let t0 = Instant::now();
    let src = GaussianPair::new(4.0, 4.0).unwrap();
    let curve = ratio_curve(&src, 0.05, 3.95, 64, &MinSumConfig::default()).unwrap();
    let mut ok = curve.len() == 64;
    let mut ratios = Vec::with_capacity(64);
    for pt in &curve {
        match pt.ratio {
            Some(r) => {
                ok &= pt.r_cr > 0.0 && (0.0..=1.0 + 1e-9).contains(&r);
                ratios.push(r);
            }
            None => ok &= pt.r_cr == 0.0,
        }
    }
    ok &= ratios.len() == 64;
    let mut worst_step = f64::NEG_INFINITY;
    for w in ratios[32..].windows(2) {
        worst_step = worst_step.max(w[1] - w[0]);
    }
    ok &= worst_step <= 1e-9;
    let last = *ratios.last().unwrap();
    ok &= last < 0.2;
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    report(
        1,
        "ratio-curve-shape",
        ok,
        &format!(
            "64 points, worst upward step on upper half {worst_step:.2e}, final ratio {last:.4}, {secs:.2} s"
        ),
    );
}

/// Closed-form spot checks on the benchmark source: the single-message
/// common-reconstruction rate at distortions 1 and 4, and the two
/// direction bounds at the worked zero-covariance point (side A
/// unconstrained, side B reconstructing the first coordinate at ceiling 1).
#[test]
fn criterion_2_closed_form_values() {
    let t0 = Instant::now();
    let src = GaussianPair::new(4.0, 4.0).unwrap();
    let r1 = one_way_cr_rate(&src, 1.0).unwrap();
    let r4 = one_way_cr_rate(&src, 4.0).unwrap();
    let be = sum_rate_bounds(
        &src,
        &LinearFn::new(0.0, 0.0),
        &LinearFn::new(1.0, 0.0),
        &DistortionPair::new(f64::INFINITY, 1.0),
        &KappaVec::default(),
    )
    .unwrap();
    let want = 0.5 * 2.5f64.log2();
    let mut ok = (r1 - 0.6610).abs() <= 1e-3 && r4 == 0.0;
    ok &= (be.r_odd - 0.6610).abs() <= 1e-3 && (be.r_odd - want).abs() <= 1e-12;
    ok &= be.r_even == 0.0;
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    report(
        2,
        "closed-form-values",
        ok,
        &format!(
            "r_cr(1) = {r1:.6}, r_cr(4) = {r4}, bounds at worked point = ({:.6}, {}), {secs:.2} s",
            be.r_odd, be.r_even
        ),
    );
}

/// Draws 50 random instances (variances `10^U[-0.3, 0.9)`; coefficient
/// magnitudes `U[0.3, 1.5)` with random signs; side A constant with
/// probability 1/3; each finite ceiling at `var(f) * 10^U[-1.2, 0.1)`) and
/// checks that the best rigid-linear-decoder scheme found by the built-in
/// search lands within 1e-2 bits above the minimized outer bound, and
/// never below it. The upper side encodes the claim that the outer
/// bound's free-covariance union is attained by that scheme; the suite
/// reports the measured gap rather than assuming it.
#[test]
fn criterion_3_scheme_meets_bound_on_random_instances() {
    let t0 = Instant::now();
    let min_cfg = MinSumConfig::default();
    let cfg = VerifyConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_825);
    let mut n_matched = 0u32;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_desc = String::new();
    let mut all_in_window = true;
    for i in 0..50 {
        let sx2 = 10f64.powf(rng.gen_range(-0.3f64..0.9));
        let sv2 = 10f64.powf(rng.gen_range(-0.3f64..0.9));
        let src = GaussianPair::new(sx2, sv2).unwrap();
        let a_const = rng.gen_range(0..3u32) == 0;
        let fa = if a_const {
            LinearFn::new(0.0, 0.0)
        } else {
            LinearFn::new(draw_coef(&mut rng), draw_coef(&mut rng))
        };
        let fb = LinearFn::new(draw_coef(&mut rng), draw_coef(&mut rng));
        let da = if a_const {
            f64::INFINITY
        } else {
            fa.variance(&src) * 10f64.powf(rng.gen_range(-1.2f64..0.1))
        };
        let db = fb.variance(&src) * 10f64.powf(rng.gen_range(-1.2f64..0.1));
        let d = DistortionPair::new(da, db);
        let out = verify_achievability(&src, &fa, &fb, &d, &min_cfg, &cfg).unwrap();
        if out.matched {
            n_matched += 1;
        }
        all_in_window &= out.gap_bits >= -1e-9 && out.gap_bits <= 1e-2;
        if out.gap_bits > worst {
            worst = out.gap_bits;
            worst_desc = format!(
                "worst at i={i}: sx2={sx2:.3}, sv2={sv2:.3}, fa=({:.3},{:.3}), fb=({:.3},{:.3}), da={da:.3}, db={db:.3}, bound={:.6}, achieved={:.6}",
                fa.alpha,
                fa.beta,
                fb.alpha,
                fb.beta,
                out.bound.weighted,
                out.achieved.sum_rate()
            );
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let ok = all_in_window && secs < 300.0;
    report(
        3,
        "scheme-meets-bound",
        ok,
        &format!("matched {n_matched}/50, worst gap {worst:.4} bits, {secs:.2} s; {worst_desc}"),
    );
}

/// The minimized sum-rate bound is non-increasing in each distortion
/// ceiling and midpoint-convex along grid segments: Gaussian case on a
/// 10x10 logarithmic ceiling grid with 1e-6 slack, and a binary
/// two-round instance on a 6x6 linear grid with `2/q` slack at `q = 6`.
#[test]
fn criterion_4_distortion_monotonicity_and_convexity() {
    let t0 = Instant::now();

    // Gaussian half: source variances (4, 4), side functions (1, 1) and
    // (1, 0), both ceilings swept over [0.1, 40].
    let src = GaussianPair::new(4.0, 4.0).unwrap();
    let fa = LinearFn::new(1.0, 1.0);
    let fb = LinearFn::new(1.0, 0.0);
    let cfg = MinSumConfig::default();
    let w = Weights::new(1.0, 1.0);
    let eval = |da: f64, db: f64| {
        min_sum_rate(&src, &fa, &fb, &DistortionPair::new(da, db), &w, &cfg)
            .unwrap()
            .weighted
    };
    let grid: Vec<f64> = (0..10)
        .map(|i| 0.1 * (40.0f64 / 0.1).powf(i as f64 / 9.0))
        .collect();
    let mut val = vec![vec![0.0f64; 10]; 10];
    for (i, &da) in grid.iter().enumerate() {
        for (j, &db) in grid.iter().enumerate() {
            val[i][j] = eval(da, db);
        }
    }
    let mut g_mono = f64::NEG_INFINITY;
    for i in 0..10 {
        for j in 0..9 {
            g_mono = g_mono.max(val[j + 1][i] - val[j][i]);
            g_mono = g_mono.max(val[i][j + 1] - val[i][j]);
        }
    }
    let mut g_conv = f64::NEG_INFINITY;
    for i in 0..8 {
        let mid = 0.5 * (grid[i] + grid[i + 2]);
        for j in 0..10 {
            g_conv = g_conv.max(eval(mid, grid[j]) - 0.5 * (val[i][j] + val[i + 2][j]));
            g_conv = g_conv.max(eval(grid[j], mid) - 0.5 * (val[j][i] + val[j][i + 2]));
        }
        g_conv = g_conv.max(eval(mid, mid) - 0.5 * (val[i][i] + val[i + 2][i + 2]));
    }
    let gaussian_ok = g_mono <= 1e-6 && g_conv <= 1e-6;

    // Binary half: doubly symmetric source (crossover 0.11), two rounds,
    // side A reconstructs the far bit and side B the near one, message
    // alphabets of size two, q = 6. The 6x6 ceiling grid is evenly spaced
    // so every segment midpoint is itself a grid point.
    let q = 6u32;
    let slack = 2.0 / q as f64;
    let dgrid: Vec<f64> = (0..6).map(|i| 0.05 + 0.09 * i as f64).collect();
    let deval = |da: f64, db: f64| {
        let mut p = doubly_symmetric_binary(
            0.11,
            2,
            DecoderMode::Constrained,
            q,
            Targets::new(da, db, f64::INFINITY, f64::INFINITY),
        );
        for ((_, y), v) in p.f_a.indexed_iter_mut() {
            *v = y;
        }
        p.u_sizes = vec![2, 2];
        min_rates_search(&p, None).unwrap().weighted
    };
    let mut dval = vec![vec![0.0f64; 6]; 6];
    for (i, &da) in dgrid.iter().enumerate() {
        for (j, &db) in dgrid.iter().enumerate() {
            dval[i][j] = deval(da, db);
        }
    }
    let mut d_mono = f64::NEG_INFINITY;
    for i in 0..6 {
        for j in 0..5 {
            d_mono = d_mono.max(dval[j + 1][i] - dval[j][i]);
            d_mono = d_mono.max(dval[i][j + 1] - dval[i][j]);
        }
    }
    let mut d_conv = f64::NEG_INFINITY;
    for i in 0..4 {
        for j in 0..6 {
            d_conv = d_conv.max(dval[i + 1][j] - 0.5 * (dval[i][j] + dval[i + 2][j]));
            d_conv = d_conv.max(dval[j][i + 1] - 0.5 * (dval[j][i] + dval[j][i + 2]));
        }
        d_conv = d_conv.max(dval[i + 1][i + 1] - 0.5 * (dval[i][i] + dval[i + 2][i + 2]));
    }
    let binary_ok = d_mono <= slack && d_conv <= slack;

    let secs = t0.elapsed().as_secs_f64();
    let ok = gaussian_ok && binary_ok && secs < 600.0;
    report(
        4,
        "distortion-monotone-convex",
        ok,
        &format!(
            "gaussian worst rise {g_mono:.2e} / worst convexity excess {g_conv:.2e} (slack 1e-6); \
             binary worst rise {d_mono:.2e} / worst convexity excess {d_conv:.2e} (slack {slack:.3}); {secs:.1} s"
        ),
    );
}

/// A shared reconstruction requirement and a per-terminal one with zero
/// disagreement ceilings describe the same constraint: on five seeded
/// binary instances, at every quantization in {4, 6, 8}, the two decoder
/// modes return identical minima down to the winning chain.
#[test]
fn criterion_5_common_equals_zero_disagreement() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(55_055);
    let crossovers = [0.08, 0.12, 0.17, 0.21, 0.25];
    let mut ok = true;
    let mut checked = 0u32;
    for (i, &cx) in crossovers.iter().enumerate() {
        let t = if i == 4 { 2 } else { 1 };
        let fa: Vec<usize> = (0..4).map(|_| rng.gen_range(0..2usize)).collect();
        let fb: Vec<usize> = (0..4).map(|_| rng.gen_range(0..2usize)).collect();
        let da = rng.gen_range(0.28f64..0.45);
        let db = rng.gen_range(0.28f64..0.45);
        for q in [4u32, 6, 8] {
            let mut common = doubly_symmetric_binary(
                cx,
                t,
                DecoderMode::Common,
                q,
                Targets::new(da, db, 0.0, 0.0),
            );
            for (k, ((x, y), v)) in common.f_a.indexed_iter_mut().enumerate() {
                let _ = (x, y);
                *v = fa[k];
            }
            for (k, ((x, y), v)) in common.f_b.indexed_iter_mut().enumerate() {
                let _ = (x, y);
                *v = fb[k];
            }
            if t == 2 {
                common.u_sizes = vec![2, 2];
            }
            let mut constrained = common.clone();
            constrained.mode = DecoderMode::Constrained;
            let a = min_rates_search(&common, None).unwrap();
            let b = min_rates_search(&constrained, None).unwrap();
            ok &= a.weighted == b.weighted
                && a.rates == b.rates
                && a.chain_index == b.chain_index;
            checked += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    ok &= checked == 15 && secs < 600.0;
    report(
        5,
        "common-equals-zero-disagreement",
        ok,
        &format!("{checked} instance/quantization pairs identical, {secs:.1} s"),
    );
}

/// Demanding an exact shared copy of the near bit at the far terminal
/// costs its conditional entropy: on the crossover-0.11 binary source,
/// one round, q = 8, the minimized rate sits within 0.05 bits of
/// `h2(0.11)` (and in fact matches it to floating precision).
#[test]
fn criterion_6_exact_recovery_rate() {
    let t0 = Instant::now();
    let p = doubly_symmetric_binary(
        0.11,
        1,
        DecoderMode::Common,
        8,
        Targets::new(f64::INFINITY, 0.0, f64::INFINITY, f64::INFINITY),
    );
    let out = min_rates_search(&p, None).unwrap();
    let gap = (out.rates[0] - binary_entropy(0.11)).abs();
    let secs = t0.elapsed().as_secs_f64();
    let ok = gap < 0.05 && out.weighted == out.rates[0] && secs < 300.0;
    report(
        6,
        "exact-recovery-rate",
        ok,
        &format!(
            "min rate {:.9} vs h2(0.11) = {:.9}, |gap| = {gap:.2e}, {secs:.2} s",
            out.rates[0],
            binary_entropy(0.11)
        ),
    );
}

/// On 20 seeded random instances, a million-sample linear simulation
/// reproduces the analytic distortions within four standard errors on
/// both sides, and rerunning with the same seed is bit-identical.
#[test]
fn criterion_7_simulation_matches_analysis_and_reruns_identically() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7_000_000);
    let mut ok = true;
    let mut worst_z = 0.0f64;
    for i in 0..20 {
        let sx2 = 10f64.powf(rng.gen_range(-0.3f64..0.9));
        let sv2 = 10f64.powf(rng.gen_range(-0.3f64..0.9));
        let src = GaussianPair::new(sx2, sv2).unwrap();
        let a1 = rng.gen_range(0.2f64..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let a2 = rng.gen_range(0.2f64..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let n1 = sx2 * 10f64.powf(rng.gen_range(-1.3f64..0.7));
        let n2 = sx2 * 10f64.powf(rng.gen_range(-1.3f64..0.7));
        let tc = TestChannels::new(a1, n1, a2, n2).unwrap();
        let fa = LinearFn::new(rng.gen_range(-1.5f64..1.5), rng.gen_range(-1.5f64..1.5));
        let fb = LinearFn::new(rng.gen_range(-1.5f64..1.5), rng.gen_range(-1.5f64..1.5));
        let want = achieved_point(&src, &tc, &fa, &fb).unwrap();
        let got = simulate_linear(&src, &tc, &fa, &fb, 1_000_000, 9000 + i).unwrap();
        let again = simulate_linear(&src, &tc, &fa, &fb, 1_000_000, 9000 + i).unwrap();
        ok &= got.d_a.value == again.d_a.value
            && got.d_a.se == again.d_a.se
            && got.d_b.value == again.d_b.value
            && got.d_b.se == again.d_b.se;
        for (wv, g) in [(want.d_a, got.d_a), (want.d_b, got.d_b)] {
            if g.se > 0.0 {
                let z = (g.value - wv).abs() / g.se;
                worst_z = worst_z.max(z);
                ok &= z <= 4.0;
            } else {
                ok &= g.value == wv;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    report(
        7,
        "simulation-accuracy-reproducibility",
        ok,
        &format!("20 instances, worst |empirical - analytic| = {worst_z:.2} se, {secs:.1} s"),
    );
}

/// Interactive sign agreement on the benchmark source: with the second
/// terminal replying after seeing the first message, a million-sample run
/// disagrees less than 1e-3 of the time at 16-bit resolution, while
/// simultaneous one-shot exchange stays above 1e-2 disagreement at every
/// resolution from 1 to 16 bits.
#[test]
fn criterion_8_sequential_beats_simultaneous_sign_exchange() {
    let t0 = Instant::now();
    let src = GaussianPair::new(4.0, 4.0).unwrap();
    let mut ok = true;
    let mut min_sim = f64::INFINITY;
    let mut seq16 = f64::NAN;
    for rx in 1..=16u32 {
        let out = simulate_indicator(&src, 1_000_000, 4242, rx).unwrap();
        min_sim = min_sim.min(out.simultaneous.value);
        ok &= out.simultaneous.value > 0.01;
        if rx == 16 {
            seq16 = out.sequential.value;
            ok &= seq16 < 1e-3;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    report(
        8,
        "sequential-beats-simultaneous",
        ok,
        &format!(
            "sequential error at 16 bits {seq16:.2e}, min simultaneous error {min_sim:.3}, {secs:.1} s"
        ),
    );
}
