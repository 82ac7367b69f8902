use proptest::prelude::*;

use qkd_finite::report::{
    read_csv, read_json, to_csv_string, to_json_string, RateRecord, Record, SweepRecord,
};
use qkd_finite::{key_rate, Bound, PeKind, ProtocolSpec, RateOptions, SecurityBudget};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1.0f64..1.0,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

#[test]
fn evaluated_breakdown_round_trips() {
    let p = ProtocolSpec::d_bases(5, PeKind::Cpovm).unwrap();
    let b = SecurityBudget::with_remainder(1e-9, 1e-10, 2e-10, 4e-10).unwrap();
    let r = key_rate(
        Bound::VonNeumann,
        &p,
        0.04,
        3.3e7,
        &b,
        0.8,
        &RateOptions::default(),
    )
    .unwrap();
    let rows = vec![RateRecord::new(&p, &r)];
    let json = to_json_string(&rows).unwrap();
    for key in RateRecord::HEADER {
        assert!(json.contains(&format!("\"{key}\"")), "{key}");
    }
    let back: Vec<RateRecord> = read_json(json.as_bytes()).unwrap();
    assert_eq!(back[0].breakdown(), r);
    let back: Vec<RateRecord> = read_csv(to_csv_string(&rows).unwrap().as_bytes()).unwrap();
    assert_eq!(back[0].breakdown(), r);
}

#[test]
fn csv_header_is_fixed() {
    let s = to_csv_string::<SweepRecord>(&[]).unwrap();
    assert_eq!(
        s.trim_end(),
        "family,dimension,pe_scheme,bound,q_err,n_total,n_scaled,rate,rate_clamped,q_key"
    );
}

proptest! {
    #[test]
    fn sweep_rows_round_trip(
        values in proptest::collection::vec((finite(), finite(), finite(), finite()), 0..20),
        dim in 2usize..20,
    ) {
        let rows: Vec<SweepRecord> = values
            .iter()
            .map(|&(a, b, c, d)| SweepRecord {
                family: qkd_finite::Family::DPlusOneBases,
                dimension: dim,
                pe_scheme: PeKind::Ipovm,
                bound: Bound::VonNeumann,
                q_err: a,
                n_total: b,
                n_scaled: c,
                rate: d,
                rate_clamped: d.max(0.0),
                q_key: a * 0.5,
            })
            .collect();
        let csv: Vec<SweepRecord> = read_csv(to_csv_string(&rows).unwrap().as_bytes()).unwrap();
        let json: Vec<SweepRecord> = read_json(to_json_string(&rows).unwrap().as_bytes()).unwrap();
        for (x, y) in rows.iter().zip(&csv).chain(rows.iter().zip(&json)) {
            prop_assert_eq!(x.rate.to_bits(), y.rate.to_bits());
            prop_assert_eq!(x.q_err.to_bits(), y.q_err.to_bits());
            prop_assert_eq!(x.n_total.to_bits(), y.n_total.to_bits());
            prop_assert_eq!(x.n_scaled.to_bits(), y.n_scaled.to_bits());
        }
        prop_assert_eq!(csv.len(), rows.len());
        prop_assert_eq!(json.len(), rows.len());
    }
}
