//! Time-domain susceptibility against a numerical inverse transform of the
//! frequency-domain one: x(t) = (1/π) Re ∫₀^∞ χ(ω) e^{−iωt} dω.
//!
//! χ is interpolated linearly on a grid clustered at ω_m and each segment is
//! integrated against e^{−iωt} exactly (Filon), so the oscillation costs no
//! accuracy; the tail beyond ω_max is O(1/(ω_max² t)).

use std::f64::consts::PI;

use num_complex::Complex64;
use optomech::response::{chi_freq, chi_time};
use optomech::{FrequencyGrid, OscillatorParams};

/// ∫₀¹ (1−s) e^{zs} ds and ∫₀¹ s e^{zs} ds.
fn filon_weights(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.1 {
        let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut term = Complex64::new(1.0, 0.0); // z^k / k!
        for k in 0..14 {
            let k = k as f64;
            a += term / ((k + 1.0) * (k + 2.0));
            b += term / (k + 2.0);
            term *= z / (k + 1.0);
        }
        (a, b)
    } else {
        let ez = z.exp();
        let z2 = z * z;
        ((ez - 1.0 - z) / z2, ((z - 1.0) * ez + 1.0) / z2)
    }
}

fn inverse_transform(t: f64, osc: &OscillatorParams, grid: &FrequencyGrid) -> f64 {
    let w = grid.omegas();
    let chi: Vec<Complex64> = grid.map(|x| chi_freq(x, osc));
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..w.len() - 1 {
        let h = w[i + 1] - w[i];
        let (a, b) = filon_weights(Complex64::new(0.0, -h * t));
        let phase = Complex64::from_polar(1.0, -w[i] * t);
        sum += h * phase * (chi[i] * a + chi[i + 1] * b);
    }
    sum.re / PI
}

#[test]
fn chi_time_is_the_causal_inverse_transform() {
    let osc = OscillatorParams {
        kappa_m: 1e-4,
        ..OscillatorParams::default()
    };
    let grid = FrequencyGrid::clustered(1.0, 1e-4, 0.0, 1e4, 400_001).unwrap();
    let period = 2.0 * PI;
    let mut worst: f64 = 0.0;
    for i in 1..=40 {
        let t = 0.25 * period * i as f64;
        let oracle = inverse_transform(t + 0.1, &osc, &grid);
        worst = worst.max((oracle - chi_time(t + 0.1, &osc)).abs());
    }
    assert!(worst < 1e-6, "{worst:e}");

    // the same quadrature returns zero before the impulse
    for t in [-0.5, -3.0, -20.0] {
        assert!(inverse_transform(t, &osc, &grid).abs() < 1e-6);
    }
}

#[test]
fn filon_weights_match_closed_form_at_the_switch() {
    for z in [Complex64::new(0.0, 0.0999), Complex64::new(0.0, -0.0999)] {
        let (a, b) = filon_weights(z);
        let ez = z.exp();
        let z2 = z * z;
        assert!((a - (ez - 1.0 - z) / z2).norm() < 1e-12);
        assert!((b - ((z - 1.0) * ez + 1.0) / z2).norm() < 1e-12);
    }
}
