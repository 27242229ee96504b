//! Continuous-normalized 2D Fourier transforms on a centered periodic grid.
//!
//! The grid has `m` points per axis at `x_i = -L + i h`, `h = 2L/m`. With
//! `f_hat(k) = int d^2x f(x) e^{-i k.x}` the discrete pair below is the
//! trapezoid approximation of the continuous transform and its inverse
//! `f(x) = (2 pi)^{-2} int d^2k f_hat(k) e^{i k.x}`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::linalg::C64;

/// FFT plans and frequency tables for an `m x m` grid of half-width `L`.
#[derive(Clone)]
pub struct PlanarFourier {
    m: usize,
    half_width: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl std::fmt::Debug for PlanarFourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlanarFourier").field("m", &self.m).field("half_width", &self.half_width).finish()
    }
}

impl PlanarFourier {
    pub fn new(m: usize, half_width: f64) -> Self {
        let mut planner = FftPlanner::new();
        let h = 2.0 * half_width / m as f64;
        let dk = 2.0 * PI / (m as f64 * h);
        let k = (0..m)
            .map(|i| {
                let signed = if i < m / 2 { i as isize } else { i as isize - m as isize };
                signed as f64 * dk
            })
            .collect();
        Self {
            m,
            half_width,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            k,
        }
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.m as f64
    }

    /// Frequency of FFT bin `i` along one axis.
    pub fn k(&self, i: usize) -> f64 {
        self.k[i]
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.m as f64 * self.spacing())
    }

    /// Largest `|k|` along an axis (the Nyquist frequency).
    pub fn k_max(&self) -> f64 {
        PI / self.spacing()
    }

    /// Whether bin `(i, j)` sits on the outer ring of the dual grid.
    pub fn is_boundary_bin(&self, i: usize, j: usize) -> bool {
        let edge = |b: usize| {
            let signed = if b < self.m / 2 { b as isize } else { b as isize - self.m as isize };
            signed.unsigned_abs() >= self.m / 2 - 1
        };
        edge(i) || edge(j)
    }

    /// Row-major `(x index, y index)` samples to `f_hat(k_i, k_j)` in FFT bin order.
    pub fn forward(&self, values: &[C64]) -> Vec<C64> {
        let mut data = values.to_vec();
        self.fft2(&mut data, &self.forward);
        let h2 = self.spacing().powi(2);
        let l = self.half_width;
        for i in 0..self.m {
            for j in 0..self.m {
                let phase = C64::from_polar(h2, (self.k[i] + self.k[j]) * l);
                data[i * self.m + j] *= phase;
            }
        }
        data
    }

    /// Inverse of [`forward`](Self::forward).
    pub fn inverse(&self, spectrum: &[C64]) -> Vec<C64> {
        let mut data = spectrum.to_vec();
        let l = self.half_width;
        for i in 0..self.m {
            for j in 0..self.m {
                data[i * self.m + j] *= C64::from_polar(1.0, -(self.k[i] + self.k[j]) * l);
            }
        }
        self.fft2(&mut data, &self.inverse);
        let scale = 1.0 / (self.m as f64 * self.spacing()).powi(2);
        for z in &mut data {
            *z *= scale;
        }
        data
    }

    /// Multiply the transform by `symbol(kx, ky)` and transform back.
    pub fn apply_symbol<F>(&self, values: &[C64], symbol: F) -> Vec<C64>
    where
        F: Fn(f64, f64) -> C64,
    {
        let mut spec = self.forward(values);
        for i in 0..self.m {
            for j in 0..self.m {
                spec[i * self.m + j] *= symbol(self.k[i], self.k[j]);
            }
        }
        self.inverse(&spec)
    }

    fn fft2(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        for row in data.chunks_exact_mut(m) {
            plan.process(row);
        }
        let mut col = vec![C64::new(0.0, 0.0); m];
        for j in 0..m {
            for i in 0..m {
                col[i] = data[i * m + j];
            }
            plan.process(&mut col);
            for i in 0..m {
                data[i * m + j] = col[i];
            }
        }
    }
}
