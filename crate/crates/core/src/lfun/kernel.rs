//! Trace histograms of f over F_{q^n}.
//!
//! Since f has coefficients in F_q, tr_n(f(x)) is constant on orbits of
//! x -> x^q, so only one representative per orbit is evaluated. For each
//! representative the kernel stores tr_n(s^j x^i) for i <= D and an
//! F_p-basis s^0..s^{r-1} of F_q; tr_n(f(x)) is then an integer dot product
//! with the base-p digits of f's coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Result;
use crate::family::{evaluate, PolyOverFq};
use crate::field_tower::{Elem, ExtField, FieldTower};

use super::TraceHistogram;

#[derive(Debug)]
pub struct TraceKernel {
    n: u32,
    p: u32,
    r: usize,
    degree: usize,
    orbit_sizes: Vec<u32>,
    /// column (i, j) holds tr_n(s^j rep^i) for every representative
    columns: Vec<u8>,
}

impl TraceKernel {
    pub fn build(field: &ExtField, degree: usize) -> TraceKernel {
        let p = field.p();
        let r = field.params().r as usize;
        let order = field.order() as usize;

        let mut seen = vec![false; order];
        let mut reps = Vec::new();
        let mut orbit_sizes = Vec::new();
        for x in field.elements() {
            if seen[x.raw() as usize] {
                continue;
            }
            let mut size = 0;
            let mut y = x;
            loop {
                seen[y.raw() as usize] = true;
                size += 1;
                y = field.frobenius_q(y, 1);
                if y == x {
                    break;
                }
            }
            reps.push(x);
            orbit_sizes.push(size);
        }

        let basis: Vec<Elem> = (0..r).map(|j| field.from_vector(p.pow(j as u32))).collect();
        let count = reps.len();
        let mut columns = vec![0u8; (degree + 1) * r * count];
        for (k, &x) in reps.iter().enumerate() {
            let mut power = Elem::ONE;
            for i in 0..=degree {
                for (j, &s) in basis.iter().enumerate() {
                    columns[(i * r + j) * count + k] = field.trace(field.mul(s, power)) as u8;
                }
                power = field.mul(power, x);
            }
        }

        TraceKernel {
            n: field.degree(),
            p,
            r,
            degree,
            orbit_sizes,
            columns,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Largest polynomial degree the kernel handles.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn representatives(&self) -> usize {
        self.orbit_sizes.len()
    }

    pub fn histogram(&self, f: &PolyOverFq) -> TraceHistogram {
        debug_assert!(f.degree().unwrap_or(0) <= self.degree);
        let count = self.orbit_sizes.len();
        let p = self.p;
        let mut acc = vec![0u32; count];
        for (i, &c) in f.coeffs().iter().enumerate() {
            let mut digits = c;
            for j in 0..self.r {
                let a = digits % p;
                digits /= p;
                if a == 0 {
                    continue;
                }
                let col = &self.columns[(i * self.r + j) * count..][..count];
                for (slot, &t) in acc.iter_mut().zip(col) {
                    *slot += a * t as u32;
                }
            }
        }
        let mut counts = vec![0u64; p as usize];
        for (&v, &size) in acc.iter().zip(&self.orbit_sizes) {
            counts[(v % p) as usize] += size as u64;
        }
        TraceHistogram {
            n: self.n,
            counts,
        }
    }
}

/// Direct evaluation over every element. Slow; kept as a reference.
pub fn trace_histogram_direct(field: &ExtField, f: &PolyOverFq) -> TraceHistogram {
    let mut counts = vec![0u64; field.p() as usize];
    for x in field.elements() {
        counts[field.trace(evaluate(field, f, x)) as usize] += 1;
    }
    TraceHistogram {
        n: field.degree(),
        counts,
    }
}

/// Shared access to the field tower and a per-degree kernel cache.
#[derive(Debug)]
pub struct SumEngine {
    tower: FieldTower,
    kernels: Mutex<HashMap<u32, Arc<TraceKernel>>>,
}

impl SumEngine {
    pub fn new(p: u32, r: u32) -> Result<SumEngine> {
        Ok(SumEngine {
            tower: FieldTower::new(p, r)?,
            kernels: Mutex::new(HashMap::new()),
        })
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn p(&self) -> u32 {
        self.tower.p()
    }

    pub fn q(&self) -> u32 {
        self.tower.q()
    }

    pub fn field(&self, n: u32) -> Result<Arc<ExtField>> {
        self.tower.field(n)
    }

    /// Kernel for F_{q^n} covering polynomials up to `degree`.
    pub fn kernel(&self, n: u32, degree: usize) -> Result<Arc<TraceKernel>> {
        let mut cache = self.kernels.lock().expect("kernel cache poisoned");
        if let Some(k) = cache.get(&n) {
            if k.degree() >= degree {
                return Ok(k.clone());
            }
        }
        let field = self.tower.field(n)?;
        let kernel = Arc::new(TraceKernel::build(&field, degree));
        cache.insert(n, kernel.clone());
        Ok(kernel)
    }

    pub fn trace_histogram(&self, f: &PolyOverFq, n: u32) -> Result<TraceHistogram> {
        f.check_field(self.q())?;
        let kernel = self.kernel(n, f.degree().unwrap_or(0))?;
        Ok(kernel.histogram(f))
    }

    /// Histograms for n = 1..=n_max.
    pub fn histograms(&self, f: &PolyOverFq, n_max: u32) -> Result<Vec<TraceHistogram>> {
        (1..=n_max).map(|n| self.trace_histogram(f, n)).collect()
    }
}
