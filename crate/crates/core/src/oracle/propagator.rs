//! Exact discrete-time propagation of the linearized Langevin equations.
//!
//! State (real): x, p, Re/Im of the vacuum-driven readout amplitude a_v,
//! Re/Im of the displacement-driven amplitude a_s, and an integrator q of
//! the output quadrature Y₁ = −v₁ + √(2κ_r)·Re(a_v + a_s) that is reset
//! every step so q/dt is the step average of Y₁.
//!
//! Only a_v sources the radiation-pressure force F_BA = −2ħḠ₀·Re a_v; the
//! O(Ḡ₀²) loop through a_s (dynamical back-action) is left out, matching the
//! linear model the analytic spectra describe.

use nalgebra::{DMatrix, SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::Params;
use crate::response::bath_force_psd;

pub const DIM: usize = 7;
pub type Mat = SMatrix<f64, DIM, DIM>;
pub type Vector = SVector<f64, DIM>;

pub const X: usize = 0;
pub const P: usize = 1;
pub const AV_RE: usize = 2;
pub const AV_IM: usize = 3;
pub const AS_RE: usize = 4;
pub const AS_IM: usize = 5;
pub const Q: usize = 6;

/// Independent white sources: input quadratures v₁, v₂ and the bath force.
pub const SOURCES: usize = 3;

/// Which physical couplings are active. Turning both off leaves reflected
/// vacuum at the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Switches {
    pub coupling: bool,
    pub bath: bool,
}

impl Default for Switches {
    fn default() -> Self {
        Self {
            coupling: true,
            bath: true,
        }
    }
}

fn drift(params: &Params, switches: Switches) -> Mat {
    let (osc, cav) = (params.osc(), params.cavity());
    let (half, delta) = (0.5 * cav.kappa_r, cav.detuning);
    let g = if switches.coupling { cav.g0_bar } else { 0.0 };
    let mut a = Mat::zeros();
    a[(X, P)] = 1.0 / osc.mass;
    a[(P, X)] = -osc.mass * osc.omega_m * osc.omega_m;
    a[(P, P)] = -osc.kappa_m;
    a[(P, AV_RE)] = -2.0 * params.hbar() * g;
    for (re, im) in [(AV_RE, AV_IM), (AS_RE, AS_IM)] {
        a[(re, re)] = -half;
        a[(re, im)] = delta;
        a[(im, re)] = -delta;
        a[(im, im)] = -half;
    }
    a[(AS_IM, X)] = -g;
    let out = (2.0 * cav.kappa_r).sqrt();
    a[(Q, AV_RE)] = out;
    a[(Q, AS_RE)] = out;
    a
}

/// Input column and white-noise intensity (single-sided PSD / 2) per source.
fn sources(params: &Params, switches: Switches) -> [(Vector, f64); SOURCES] {
    let input = (0.5 * params.cavity().kappa_r).sqrt();
    let mut v1 = Vector::zeros();
    v1[AV_RE] = input;
    v1[Q] = -1.0;
    let mut v2 = Vector::zeros();
    v2[AV_IM] = input;
    let mut f = Vector::zeros();
    f[P] = 1.0;
    let bath = if switches.bath {
        0.5 * bath_force_psd(params.units(), params.osc())
    } else {
        0.0
    };
    [(v1, 0.5), (v2, 0.5), (f, bath)]
}

/// Van Loan: returns (e^{A dt}, ∫₀^dt e^{As} G e^{Aᵀs} ds).
fn van_loan(a: &Mat, g: &Mat, dt: f64) -> (Mat, Mat) {
    let mut m = DMatrix::<f64>::zeros(2 * DIM, 2 * DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            m[(i, j)] = -a[(i, j)] * dt;
            m[(i, DIM + j)] = g[(i, j)] * dt;
            m[(DIM + i, DIM + j)] = a[(j, i)] * dt;
        }
    }
    let e = m.exp();
    let f22t = Mat::from_fn(|i, j| e[(DIM + j, DIM + i)]);
    let f12 = Mat::from_fn(|i, j| e[(i, DIM + j)]);
    let q = f22t * f12;
    (f22t, 0.5 * (q + q.transpose()))
}

/// Symmetric square-root factor L with L Lᵀ = Q (negative rounding
/// eigenvalues clipped).
fn factor(q: &Mat) -> Mat {
    let eig = q.symmetric_eigen();
    let mut l = eig.eigenvectors;
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        for i in 0..DIM {
            l[(i, j)] *= s;
        }
    }
    l
}

/// One-step transition and per-source noise factors for a fixed dt.
#[derive(Debug, Clone)]
pub struct Propagator {
    dt: f64,
    transition: Mat,
    noise: [Mat; SOURCES],
}

impl Propagator {
    pub fn new(params: &Params, dt: f64, switches: Switches) -> Self {
        let a = drift(params, switches);
        let mut transition = Mat::identity();
        let noise = sources(params, switches).map(|(b, intensity)| {
            let (phi, q) = van_loan(&a, &(b * b.transpose() * intensity), dt);
            transition = phi;
            factor(&q)
        });
        Self {
            dt,
            transition,
            noise,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn transition(&self) -> &Mat {
        &self.transition
    }

    /// Noise-free step.
    pub fn step_mean(&self, state: &Vector) -> Vector {
        self.transition * state
    }

    /// Stochastic step; draws 7 normals from each source stream.
    pub fn step(&self, state: &Vector, streams: &mut NoiseStreams) -> Vector {
        let mut next = self.transition * state;
        for (l, rng) in self.noise.iter().zip(streams.rngs.iter_mut()) {
            let w = Vector::from_fn(|_, _| StandardNormal.sample(rng));
            next += l * w;
        }
        next
    }
}

/// Independent ChaCha streams for v₁, v₂ and F_q derived from one seed.
#[derive(Debug, Clone)]
pub struct NoiseStreams {
    rngs: [ChaCha8Rng; SOURCES],
}

impl NoiseStreams {
    pub fn new(seed: u64) -> Self {
        let rngs = std::array::from_fn(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64 + 1);
            rng
        });
        Self { rngs }
    }
}
