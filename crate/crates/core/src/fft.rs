//! Radix-2 complex FFT on power-of-two lengths, plus a square 2D wrapper.
//!
//! Conventions: `forward` computes `X[k] = sum_n x[n] e^{-2 pi i kn/N}`,
//! `inverse` the same with `+i` and *no* `1/N` factor.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    // twiddles[j] = e^{-2 pi i j / n}, j < n/2
    twiddles: Vec<Complex64>,
    rev: Vec<u32>,
}

impl Fft {
    pub fn new(n: usize) -> Fft {
        assert!(n.is_power_of_two(), "FFT length must be a power of two, got {n}");
        let bits = n.trailing_zeros();
        let twiddles = (0..n / 2)
            .map(|j| {
                let a = -2.0 * PI * j as f64 / n as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        let rev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Fft { n, twiddles, rev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.rev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Row-major `m x m` transforms built from a length-`m` plan.
#[derive(Debug, Clone)]
pub struct Fft2 {
    plan: Fft,
}

impl Fft2 {
    pub fn new(m: usize) -> Fft2 {
        Fft2 { plan: Fft::new(m) }
    }

    pub fn side(&self) -> usize {
        self.plan.len()
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let m = self.plan.len();
        assert_eq!(data.len(), m * m);
        for row in data.chunks_exact_mut(m) {
            self.plan.run(row, inverse);
        }
        let mut col = alloc::vec![Complex64::new(0.0, 0.0); m];
        for c in 0..m {
            for r in 0..m {
                col[r] = data[r * m + c];
            }
            self.plan.run(&mut col, inverse);
            for r in 0..m {
                data[r * m + c] = col[r];
            }
        }
    }
}

/// Dimension-agnostic plan for `d`-dimensional periodic grids with side `m`.
#[derive(Debug, Clone)]
pub enum GridFft {
    One(Fft),
    Two(Fft2),
}

impl GridFft {
    pub fn new(dim: usize, m: usize) -> GridFft {
        match dim {
            1 => GridFft::One(Fft::new(m)),
            2 => GridFft::Two(Fft2::new(m)),
            _ => panic!("unsupported dimension {dim}"),
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        match self {
            GridFft::One(p) => p.forward(data),
            GridFft::Two(p) => p.forward(data),
        }
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        match self {
            GridFft::One(p) => p.inverse(data),
            GridFft::Two(p) => p.inverse(data),
        }
    }
}
