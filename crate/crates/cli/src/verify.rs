use qkd_finite::entropy::{pguess, pguess_d_bases, pguess_six_state, vn_entropy};
use qkd_finite::estimation::simulate_pe_bound;
use qkd_finite::oracle::{
    build_eve_states_bb84, helstrom_pguess, maximize_f_over_v, pyramid_gram, srm_eta_closed,
    srm_pguess_numeric, symmetric_eig,
};
use qkd_finite::report::CheckRecord;
use qkd_finite::{PeKind, ProtocolSpec, Result};

use crate::DEFAULT_DIMENSIONS;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    pub seed: u64,
    pub trials: usize,
    pub mc_dist: Vec<f64>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 10_000,
            mc_dist: vec![0.95, 0.05],
        }
    }
}

fn check(name: &str, residuals: &[f64], tolerance: f64) -> CheckRecord {
    let max_residual = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    CheckRecord {
        check: name.to_string(),
        passed: residuals.iter().all(|&r| r <= tolerance),
        max_residual,
        tolerance,
        cases: residuals.len(),
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
}

/// Runs every oracle suite and the Monte Carlo estimation check.
pub fn run_checks(settings: &VerifySettings) -> Result<Vec<CheckRecord>> {
    let six = ProtocolSpec::six_state(PeKind::Cpovm);
    let qudit2 = ProtocolSpec::d_bases(2, PeKind::Cpovm)?;
    let bb84 = ProtocolSpec::bb84(PeKind::Cpovm);
    let mut rows = Vec::new();

    let mut r = Vec::new();
    for q in grid(0.0, 0.3, 400) {
        r.push((pguess_d_bases(2, q)? - pguess_six_state(q)?).abs());
    }
    rows.push(check("pguess-d2-reduction", &r, 1e-12));

    let mut r = Vec::new();
    for q in grid(0.0, 0.3, 400) {
        r.push((vn_entropy(&qudit2, q)?.bits - vn_entropy(&six, q)?.bits).abs());
    }
    rows.push(check("vn-d2-reduction", &r, 1e-12));

    let mut r = Vec::new();
    for q in grid(0.001, 0.25, 100) {
        let e = build_eve_states_bb84(q, q, q)?;
        r.push((helstrom_pguess(&e)? - pguess(&bb84, q)?).abs());
    }
    rows.push(check("helstrom-bb84", &r, 1e-10));

    let mut r = Vec::new();
    for q in grid(0.001, 0.25, 25) {
        r.push((maximize_f_over_v(q)?.0 - q).abs());
    }
    rows.push(check("helstrom-worst-case-v", &r, 1e-6));

    let mut srm = Vec::new();
    let mut norm = Vec::new();
    let mut psd = Vec::new();
    for &d in &DEFAULT_DIMENSIONS {
        for q in grid(0.01, 0.15, 15) {
            srm.push((srm_pguess_numeric(d, q)? - pguess_d_bases(d, q)?).abs());
            let c = srm_eta_closed(d, q)?;
            norm.push((c.eta0 + (d as f64 - 1.0) * c.eta1 - 1.0).abs());
            psd.push(-symmetric_eig(&pyramid_gram(d, q)?)?.min_value());
        }
    }
    rows.push(check("srm-d-bases", &srm, 1e-9));
    rows.push(check("srm-normalization", &norm, 1e-12));
    rows.push(check("gram-psd", &psd, 1e-10));

    let mut r = Vec::new();
    for eps in [0.5, 0.1, 0.01] {
        for m in [50usize, 500] {
            let s = simulate_pe_bound(&settings.mc_dist, m, eps, settings.trials, settings.seed)?;
            r.push(s.violation_rate - eps);
        }
    }
    rows.push(check("pe-monte-carlo", &r, 0.0));
    Ok(rows)
}
