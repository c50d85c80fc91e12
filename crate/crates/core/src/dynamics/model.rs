use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{DetuningProfile, DriveParams, StateDerivative, StateVector};
use crate::coupling::{CouplingTables, Topology};
use crate::error::{Error, Result};

/// How `Σ_l K_lk R_l` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMethod {
    /// FFT for `N ≥ 48`, dense below.
    #[default]
    Auto,
    Dense,
    /// Circulant convolution on rings, zero-padded embedding on chains.
    Fft,
}

const FFT_THRESHOLD: usize = 48;

#[derive(Clone)]
enum CouplingOperator {
    Dense {
        kernel: Vec<Complex64>,
    },
    Fft {
        len: usize,
        spectrum: Vec<Complex64>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
}

impl std::fmt::Debug for CouplingOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CouplingOperator::Dense { .. } => f.write_str("Dense"),
            CouplingOperator::Fft { len, .. } => write!(f, "Fft({len})"),
        }
    }
}

/// Scratch buffers for one thread of evaluation.
#[derive(Debug, Clone)]
pub struct Workspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    r: Vec<Complex64>,
    kr: Vec<Complex64>,
}

/// A fully specified aggregate under constant drive.
#[derive(Debug, Clone)]
pub struct Model {
    n: usize,
    topology: Topology,
    drive: DriveParams,
    detuning: Vec<f64>,
    /// Normalized `K_lk` by separation.
    kernel: Vec<Complex64>,
    coupling: CouplingOperator,
}

impl Model {
    pub fn new(tables: &CouplingTables, drive: DriveParams, detuning: DetuningProfile) -> Result<Self> {
        Self::with_method(tables, drive, detuning, CouplingMethod::Auto)
    }

    pub fn with_method(
        tables: &CouplingTables,
        drive: DriveParams,
        detuning: DetuningProfile,
        method: CouplingMethod,
    ) -> Result<Self> {
        drive.validate()?;
        let n = tables.n();
        if detuning.delta_k.len() != n {
            return Err(Error::DimensionMismatch {
                what: "detuning profile",
                expected: n,
                got: detuning.delta_k.len(),
            });
        }
        let kernel: Vec<Complex64> = tables
            .normalized_kernel()
            .into_iter()
            .map(|(g, d)| Complex64::new(g, d))
            .collect();
        let topology = tables.geometry.topology;
        let use_fft = match method {
            CouplingMethod::Auto => n >= FFT_THRESHOLD,
            CouplingMethod::Dense => false,
            CouplingMethod::Fft => true,
        };
        let coupling = if use_fft {
            fft_operator(&kernel, topology)
        } else {
            let mut dense = vec![Complex64::new(0.0, 0.0); n * n];
            for l in 0..n {
                for k in 0..n {
                    dense[l * n + k] = kernel[topology.separation(l, k, n)];
                }
            }
            CouplingOperator::Dense { kernel: dense }
        };
        Ok(Self {
            n,
            topology,
            drive,
            detuning: detuning.delta_k,
            kernel,
            coupling,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn drive(&self) -> &DriveParams {
        &self.drive
    }

    pub fn detuning(&self) -> &[f64] {
        &self.detuning
    }

    /// `Σ_{l≠k} K_lk` for molecule `k`.
    pub fn row_sum(&self, k: usize) -> Complex64 {
        (0..self.n)
            .map(|l| self.kernel[self.topology.separation(l, k, self.n)])
            .sum()
    }

    pub fn workspace(&self) -> Workspace {
        let (len, scratch) = match &self.coupling {
            CouplingOperator::Dense { .. } => (0, 0),
            CouplingOperator::Fft {
                len,
                forward,
                inverse,
                ..
            } => (
                *len,
                forward
                    .get_inplace_scratch_len()
                    .max(inverse.get_inplace_scratch_len()),
            ),
        };
        Workspace {
            buf: vec![Complex64::new(0.0, 0.0); len],
            scratch: vec![Complex64::new(0.0, 0.0); scratch],
            r: vec![Complex64::new(0.0, 0.0); self.n],
            kr: vec![Complex64::new(0.0, 0.0); self.n],
        }
    }

    pub(crate) fn check_state(&self, state: &StateVector) -> Result<()> {
        state.check_consistent()?;
        if state.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: self.n,
                got: state.len(),
            });
        }
        Ok(())
    }

    /// `ws.kr = K·ws.r`, i.e. `Σ_l K_lk R_l`.
    fn apply_coupling(&self, ws: &mut Workspace) {
        let n = self.n;
        let r = &ws.r;
        match &self.coupling {
            CouplingOperator::Dense { kernel } => {
                for (k, out) in ws.kr.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (l, rl) in r.iter().enumerate() {
                        acc += kernel[l * n + k] * rl;
                    }
                    *out = acc;
                }
            }
            CouplingOperator::Fft {
                spectrum,
                forward,
                inverse,
                ..
            } => {
                ws.buf[..n].copy_from_slice(r);
                ws.buf[n..].fill(Complex64::new(0.0, 0.0));
                forward.process_with_scratch(&mut ws.buf, &mut ws.scratch);
                for (b, s) in ws.buf.iter_mut().zip(spectrum) {
                    *b *= s;
                }
                inverse.process_with_scratch(&mut ws.buf, &mut ws.scratch);
                ws.kr.copy_from_slice(&ws.buf[..n]);
            }
        }
    }

    /// Derivative of the flat layout `[ρ11; ρ22; ρ33; Re R; Im R]`.
    pub fn rhs_flat(&self, y: &[f64], dy: &mut [f64], ws: &mut Workspace) {
        let n = self.n;
        debug_assert_eq!(y.len(), 5 * n);
        let (rho11, rest) = y.split_at(n);
        let (rho22, rest) = rest.split_at(n);
        let (rho33, rest) = rest.split_at(n);
        let (re_r, im_r) = rest.split_at(n);

        for (k, slot) in ws.r.iter_mut().enumerate() {
            *slot = Complex64::new(re_r[k], im_r[k]);
        }
        self.apply_coupling(ws);

        let (d11, rest) = dy.split_at_mut(n);
        let (d22, rest) = rest.split_at_mut(n);
        let (d33, rest) = rest.split_at_mut(n);
        let (dre, dim) = rest.split_at_mut(n);

        for k in 0..n {
            let site = Site {
                rho11: rho11[k],
                rho22: rho22[k],
                rho33: rho33[k],
                r: ws.r[k],
                coupled: ws.kr[k],
                neighbors: self.neighbor_population(rho22, k),
                detuning: self.detuning[k],
            };
            let (dp, dr) = site.derivative(&self.drive);
            d11[k] = dp[0];
            d22[k] = dp[1];
            d33[k] = dp[2];
            dre[k] = dr.re;
            dim[k] = dr.im;
        }
    }

    #[inline]
    fn neighbor_population(&self, rho22: &[f64], k: usize) -> f64 {
        let n = self.n;
        match self.topology {
            Topology::Ring => rho22[(k + n - 1) % n] + rho22[(k + 1) % n],
            Topology::Chain => {
                let left = if k > 0 { rho22[k - 1] } else { 0.0 };
                let right = if k + 1 < n { rho22[k + 1] } else { 0.0 };
                left + right
            }
        }
    }

    pub fn rhs(&self, state: &StateVector) -> Result<StateDerivative> {
        self.check_state(state)?;
        let y = state.to_flat();
        let mut dy = vec![0.0; y.len()];
        self.rhs_flat(&y, &mut dy, &mut self.workspace());
        Ok(StateVector::from_flat(&dy))
    }

    /// State with the given populations and `R` set to the local linearized
    /// steady value `R_k = iΩZ_k / [(Γ⊥ + iΔ_k + α n_k) − S_k Z_k]`, where
    /// `S_k` is the kernel row sum.
    pub fn seeded_state(&self, rho11: &[f64], rho22: &[f64]) -> Result<StateVector> {
        let n = self.n;
        for (what, v) in [("rho11", rho11), ("rho22", rho22)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let p = &self.drive;
        let i = Complex64::i();
        let r = (0..n)
            .map(|k| {
                let z = rho22[k] - rho11[k];
                let denom = p.gamma_perp + i * self.detuning[k]
                    + p.alpha * self.neighbor_population(rho22, k)
                    - self.row_sum(k) * z;
                i * p.omega * z / denom
            })
            .collect();
        Ok(StateVector {
            rho11: rho11.to_vec(),
            rho22: rho22.to_vec(),
            rho33: rho11.iter().zip(rho22).map(|(a, b)| 1.0 - a - b).collect(),
            r,
        })
    }

    pub fn seeded_uniform(&self, rho11: f64, rho22: f64) -> StateVector {
        self.seeded_state(&vec![rho11; self.n], &vec![rho22; self.n])
            .expect("lengths match by construction")
    }
}

/// Local inputs of one molecule's equations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Site {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub r: Complex64,
    /// `Σ_l K_lk R_l`.
    pub coupled: Complex64,
    /// `ρ22` summed over the nearest neighbors.
    pub neighbors: f64,
    pub detuning: f64,
}

impl Site {
    /// `([ρ11', ρ22', ρ33'], R')`.
    #[inline]
    pub fn derivative(&self, p: &DriveParams) -> ([f64; 3], Complex64) {
        let i = Complex64::i();
        let z = self.rho22 - self.rho11;
        let rc = self.r.conj();
        // The "+ c.c." of the population equations: twice the real part.
        let coll = 0.5 * (self.coupled * rc - i * p.omega * rc).re;
        let ann = p.alpha * self.rho22 * self.neighbors;

        let d11 = coll + ann + p.gamma31 * self.rho33 + p.gamma21 * self.rho22;
        let d22 = -coll - 2.0 * ann + p.gamma32 * self.rho33 - p.gamma21 * self.rho22;
        let d33 = ann - (p.gamma31 + p.gamma32) * self.rho33;
        let dr = -(p.gamma_perp + i * self.detuning) * self.r + self.coupled * z
            - i * p.omega * z
            - p.alpha * self.r * self.neighbors;
        ([d11, d22, d33], dr)
    }
}

fn fft_operator(kernel: &[Complex64], topology: Topology) -> CouplingOperator {
    let n = kernel.len();
    let zero = Complex64::new(0.0, 0.0);
    // First column of the circulant whose action reproduces K on the
    // leading n entries.
    let column: Vec<Complex64> = match topology {
        Topology::Ring => (0..n).map(|j| kernel[j.min(n - j)]).collect(),
        Topology::Chain => {
            let len = 2 * n;
            let mut c = vec![zero; len];
            c[..n].copy_from_slice(kernel);
            for j in 1..n {
                c[len - j] = kernel[j];
            }
            c
        }
    };
    let len = column.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let mut spectrum = column;
    forward.process(&mut spectrum);
    let scale = 1.0 / len as f64;
    for s in spectrum.iter_mut() {
        *s *= scale;
    }
    CouplingOperator::Fft {
        len,
        spectrum,
        forward,
        inverse,
    }
}
