//! End-to-end checks that the biased cover search actually moves the
//! ensemble average in the requested direction, and that it degrades to
//! the uniform cover when there is nothing to exploit.

use cascade_scope::covers::{optimize_cover, uniform_cover, validate_cover, BiasObjective, Direction};
use cascade_scope::ensemble::{ensemble_average, EnsembleConfig};
use cascade_scope::fields::generators::demo1d_value;
use cascade_scope::{Grid, ScalarField, ScalarSeries};

fn series_of(value: impl Fn(f64) -> f64, n: usize, half: f64, t: f64) -> ScalarSeries {
    let grid = Grid::new(1, &[n], &[-half], &[2.0 * half], &[false]).unwrap();
    let field = ScalarField::sample(grid, |x| value(x[0])).unwrap();
    ScalarSeries::time_constant(field, t, 5).unwrap()
}

#[test]
fn bias_directions_bracket_the_uniform_average() {
    let wave = |x: f64| (std::f64::consts::PI * x / 5.0).sin();
    let series = series_of(wave, 1 << 14, 35.0, 100.0);
    let config = EnsembleConfig::for_dim(1, 10.0).unwrap();
    let r = 0.5;
    let uniform = uniform_cover(10.0, r, 1, config.k1, config.k2).unwrap();
    let base = ensemble_average(&series, &uniform, &config).unwrap();
    let maxed = optimize_cover(
        &series,
        r,
        &BiasObjective::new(Direction::Maximize, 50),
        &config,
    )
    .unwrap();
    let minned = optimize_cover(
        &series,
        r,
        &BiasObjective::new(Direction::Minimize, 50),
        &config,
    )
    .unwrap();
    let hi = ensemble_average(&series, &maxed, &config).unwrap();
    let lo = ensemble_average(&series, &minned, &config).unwrap();
    assert!(validate_cover(&maxed).is_valid(), "{:?}", validate_cover(&maxed));
    assert!(validate_cover(&minned).is_valid(), "{:?}", validate_cover(&minned));
    assert!(
        hi > base + 0.05 && lo < base - 0.05,
        "lo {lo} base {base} hi {hi}"
    );
}

#[test]
fn constant_density_leaves_nothing_to_exploit() {
    let series = series_of(|_| 2.5, 1 << 15, 35.0, 100.0);
    let config = EnsembleConfig::for_dim(1, 10.0).unwrap();
    let r = 1.0;
    let uniform = uniform_cover(10.0, r, 1, config.k1, config.k2).unwrap();
    let base = ensemble_average(&series, &uniform, &config).unwrap();
    for direction in [Direction::Maximize, Direction::Minimize] {
        let biased = optimize_cover(
            &series,
            r,
            &BiasObjective::new(direction, 20),
            &config,
        )
        .unwrap();
        let value = ensemble_average(&series, &biased, &config).unwrap();
        assert!(
            (value - base).abs() <= 1e-9 * base.abs(),
            "{direction:?}: {value} vs {base}"
        );
    }
}

#[test]
fn no_direction_returns_the_uniform_cover() {
    let series = series_of(demo1d_value, 1 << 12, 35.0, 100.0);
    let config = EnsembleConfig::for_dim(1, 10.0).unwrap();
    let none = optimize_cover(
        &series,
        2.0,
        &BiasObjective::new(Direction::None, 50),
        &config,
    )
    .unwrap();
    let uniform = uniform_cover(10.0, 2.0, 1, config.k1, config.k2).unwrap();
    assert_eq!(none.centers(), uniform.centers());
    assert_eq!(none.n(), uniform.n());
}
