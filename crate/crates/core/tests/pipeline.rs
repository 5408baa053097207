use std::path::PathBuf;

use vaxstock_core::demand::{fit_sigmoid, normalize, repair_monotonicity, CumulativeSeries};
use vaxstock_core::ingest::{load_csv, regularize, CsvColumns};
use vaxstock_core::Error;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn prepare(location: &str, columns: &CsvColumns) -> (CumulativeSeries, usize) {
    let raw = load_csv(&data("owid_sample.csv"), location, columns).unwrap();
    let daily = regularize(&raw).unwrap();
    let horizon = (raw.last_date().unwrap() - raw.first_reported().unwrap()).num_days() + 1;
    assert_eq!(daily.len() as i64, horizon);
    assert!(daily.iter().enumerate().all(|(i, p)| p.0 == i as u32 + 1));
    let (repaired, corrected) = repair_monotonicity(&daily);
    (normalize(&repaired).unwrap(), corrected)
}

#[test]
fn every_fixture_location_yields_a_valid_series() {
    for location in ["Denmark", "Hungary", "Mexico", "France"] {
        let (series, corrected) = prepare(location, &CsvColumns::default());
        assert_eq!(*series.fractions().last().unwrap(), 1.0);
        assert!(series.fractions().windows(2).all(|w| w[1] >= w[0]));
        if location == "France" {
            assert!(corrected > 0, "the France fixture contains a decrease");
        } else {
            assert_eq!(corrected, 0, "{location}");
        }
        let fit = fit_sigmoid(&series).unwrap();
        assert!(fit.rmse < 0.05, "{location}: rmse {}", fit.rmse);
        assert!(fit.params.a > 0.0 && fit.params.b > 0.0);
    }
}

#[test]
fn people_vaccinated_column_is_usable() {
    let columns = CsvColumns {
        value: "people_vaccinated".into(),
        ..CsvColumns::default()
    };
    let (series, _) = prepare("Hungary", &columns);
    assert!(series.len() > 100);
}

#[test]
fn constant_fixture_is_degenerate() {
    let raw = load_csv(&data("degenerate.csv"), "Flatland", &CsvColumns::default()).unwrap();
    let series = normalize(&regularize(&raw).unwrap()).unwrap();
    assert!(matches!(
        fit_sigmoid(&series),
        Err(Error::DegenerateSeries(_))
    ));
}
