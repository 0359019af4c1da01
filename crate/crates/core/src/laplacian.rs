//! First nonzero eigenvalue of the Laplace-Beltrami operator of a closed
//! surface, from a cotangent discretization on the triangulated sphere
//! grid with lumped mass.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::minkowski::{inner, MinkowskiVec};
use crate::quadrature::sphere_nodes;
use crate::surface::SurfacePatch;

/// Closed triangle mesh: `n_theta` rings of `n_phi` vertices at the grid
/// nodes plus two pole vertices (last two indices) taken from the rotated
/// chart.
#[derive(Debug, Clone)]
pub struct SphereMesh {
    pub positions: Vec<MinkowskiVec>,
    pub triangles: Vec<[usize; 3]>,
}

impl SphereMesh {
    pub fn build(patch: &SurfacePatch, n_theta: usize, n_phi: usize) -> Result<Self> {
        let pole = patch
            .pole_patch()
            .ok_or_else(|| GeometryError::NotCompact(patch.name.clone()))?;
        let mut positions = sphere_nodes(n_theta, n_phi)
            .into_iter()
            .map(|(t, p, _)| patch.position(t, p))
            .collect::<Result<Vec<_>>>()?;
        let half_pi = std::f64::consts::FRAC_PI_2;
        // omega = (0, 0, +-1) in the rotated chart.
        positions.push(pole.position(half_pi, half_pi)?);
        positions.push(pole.position(half_pi, 3.0 * half_pi)?);
        let north = n_theta * n_phi;
        let south = north + 1;
        let at = |i: usize, j: usize| i * n_phi + (j % n_phi);
        let mut triangles = Vec::with_capacity(2 * n_theta * n_phi);
        for j in 0..n_phi {
            triangles.push([north, at(0, j), at(0, j + 1)]);
            triangles.push([south, at(n_theta - 1, j + 1), at(n_theta - 1, j)]);
        }
        for i in 0..n_theta - 1 {
            for j in 0..n_phi {
                triangles.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
                triangles.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
        Ok(Self { positions, triangles })
    }

    /// Stiffness matrix (cotangent weights, symmetric CSR) and lumped mass.
    pub fn assemble(&self) -> Result<(CsrMatrix, Vec<f64>)> {
        let n = self.positions.len();
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(self.triangles.len() * 9);
        let mut mass = vec![0.0; n];
        for tri in &self.triangles {
            let p = tri.map(|k| self.positions[k]);
            let area = triangle_area(&p[0], &p[1], &p[2])?;
            for corner in 0..3 {
                let (i, j) = ((corner + 1) % 3, (corner + 2) % 3);
                let a = p[i] - p[corner];
                let b = p[j] - p[corner];
                let cross = inner(&a, &a) * inner(&b, &b) - inner(&a, &b).powi(2);
                let w = 0.5 * inner(&a, &b) / cross.sqrt();
                let (vi, vj) = (tri[i], tri[j]);
                entries.push((vi, vj, -w));
                entries.push((vj, vi, -w));
                entries.push((vi, vi, w));
                entries.push((vj, vj, w));
                mass[tri[corner]] += area / 3.0;
            }
        }
        Ok((CsrMatrix::from_triplets(n, entries), mass))
    }
}

fn triangle_area(a: &MinkowskiVec, b: &MinkowskiVec, c: &MinkowskiVec) -> Result<f64> {
    let (e1, e2) = (*b - *a, *c - *a);
    let gram = inner(&e1, &e1) * inner(&e2, &e2) - inner(&e1, &e2).powi(2);
    if !(gram > 0.0) || inner(&e1, &e1) <= 0.0 {
        return Err(GeometryError::EigenSolverFailure(
            "mesh triangle is not spacelike".into(),
        ));
    }
    Ok(0.5 * gram.sqrt())
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let row = |i: usize| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(|k| self.vals[k] * x[self.cols[k]])
                .sum::<f64>()
        };
        if self.n >= 4096 {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = row(i));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = row(i);
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .filter(|&k| self.cols[k] == i)
                    .map(|k| self.vals[k])
                    .sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

/// `S = M^{-1/2} L M^{-1/2}` restricted to the complement of its kernel.
struct ScaledOperator<'a> {
    stiffness: &'a CsrMatrix,
    inv_sqrt_mass: Vec<f64>,
    kernel: Vec<f64>,
    inv_diag: Vec<f64>,
}

impl ScaledOperator<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        for (s, (x, m)) in scratch.iter_mut().zip(x.iter().zip(&self.inv_sqrt_mass)) {
            *s = x * m;
        }
        self.stiffness.mul_vec(scratch, out);
        for (o, m) in out.iter_mut().zip(&self.inv_sqrt_mass) {
            *o *= m;
        }
    }

    fn deflate(&self, x: &mut [f64]) {
        let c = dot(x, &self.kernel);
        for (x, k) in x.iter_mut().zip(&self.kernel) {
            *x -= c * k;
        }
    }

    /// Jacobi-preconditioned conjugate gradients for `S y = b` with `b`
    /// orthogonal to the kernel.
    fn solve(&self, b: &[f64], y: &mut [f64], tol: f64, max_iter: usize) -> Result<()> {
        let n = b.len();
        let mut scratch = vec![0.0; n];
        let mut sy = vec![0.0; n];
        self.deflate(y);
        self.apply(y, &mut sy, &mut scratch);
        let mut r: Vec<f64> = b.iter().zip(&sy).map(|(b, s)| b - s).collect();
        self.deflate(&mut r);
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(r, d)| r * d).collect();
        self.deflate(&mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let b_norm = dot(b, b).sqrt().max(1e-300);
        let mut sp = vec![0.0; n];
        let mut r_norm = dot(&r, &r).sqrt();
        for _ in 0..max_iter {
            if r_norm <= tol * b_norm {
                return Ok(());
            }
            self.apply(&p, &mut sp, &mut scratch);
            let alpha = rz / dot(&p, &sp);
            for i in 0..n {
                y[i] += alpha * p[i];
                r[i] -= alpha * sp[i];
                z[i] = r[i] * self.inv_diag[i];
            }
            self.deflate(&mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            r_norm = dot(&r, &r).sqrt();
        }
        if r_norm <= 1e3 * tol * b_norm {
            Ok(())
        } else {
            Err(GeometryError::EigenSolverFailure(format!(
                "conjugate gradients stalled at relative residual {:.3e}",
                r_norm / b_norm
            )))
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthonormalize(block: &mut [Vec<f64>], kernel: &[f64]) {
    for k in 0..block.len() {
        for _ in 0..2 {
            let c = dot(&block[k], kernel);
            for (x, q) in block[k].iter_mut().zip(kernel) {
                *x -= c * q;
            }
            for j in 0..k {
                let c = dot(&block[k], &block[j]);
                let (head, tail) = block.split_at_mut(k);
                for (x, q) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= c * q;
                }
            }
        }
        let norm = dot(&block[k], &block[k]).sqrt();
        for x in block[k].iter_mut() {
            *x /= norm;
        }
    }
}

/// Smallest nonzero eigenvalues of `L x = lambda M x` by block inverse
/// iteration with Rayleigh-Ritz, returned ascending.
pub fn smallest_eigenvalues(stiffness: &CsrMatrix, mass: &[f64], block_size: usize) -> Result<Vec<f64>> {
    let n = stiffness.n;
    if mass.iter().any(|m| !(*m > 0.0)) {
        return Err(GeometryError::EigenSolverFailure("nonpositive lumped mass".into()));
    }
    let total: f64 = mass.iter().sum();
    let diag = stiffness.diagonal();
    let op = ScaledOperator {
        stiffness,
        inv_sqrt_mass: mass.iter().map(|m| 1.0 / m.sqrt()).collect(),
        kernel: mass.iter().map(|m| (m / total).sqrt()).collect(),
        inv_diag: diag.iter().zip(mass).map(|(d, m)| if *d > 0.0 { m / d } else { 1.0 }).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut block: Vec<Vec<f64>> = (0..block_size)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut block, &op.kernel);
    let mut ritz: Vec<f64> = vec![1.0; block_size];
    let mut previous = f64::INFINITY;
    let mut scratch = vec![0.0; n];
    for _ in 0..300 {
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(block_size);
        for (q, &theta) in block.iter().zip(&ritz) {
            let mut y: Vec<f64> = q.iter().map(|x| x / theta.max(1e-12_f64)).collect();
            op.solve(q, &mut y, 1e-11, 20 * n)?;
            next.push(y);
        }
        orthonormalize(&mut next, &op.kernel);
        let applied: Vec<Vec<f64>> = next
            .iter()
            .map(|q| {
                let mut out = vec![0.0; n];
                op.apply(q, &mut out, &mut scratch);
                out
            })
            .collect();
        let h = DMatrix::from_fn(block_size, block_size, |i, j| {
            0.5 * (dot(&next[i], &applied[j]) + dot(&next[j], &applied[i]))
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..block_size).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        block = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (k, q) in next.iter().enumerate() {
                    let w = eig.eigenvectors[(k, c)];
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi += w * qi;
                    }
                }
                v
            })
            .collect();
        ritz = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        if (ritz[0] - previous).abs() <= 1e-11 * ritz[0].abs() {
            return Ok(ritz);
        }
        previous = ritz[0];
    }
    Err(GeometryError::EigenSolverFailure("block inverse iteration did not converge".into()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lambda1Estimate {
    pub n_theta: usize,
    pub n_phi: usize,
    pub lambda1: f64,
    /// Estimate on the grid with both resolutions halved.
    pub coarse: f64,
    /// `|lambda1 - coarse|`, an a-posteriori indicator of the
    /// discretization error.
    pub refinement_gap: f64,
}

pub fn lambda1_at(patch: &SurfacePatch, n_theta: usize, n_phi: usize) -> Result<f64> {
    let mesh = SphereMesh::build(patch, n_theta, n_phi)?;
    let (l, m) = mesh.assemble()?;
    Ok(smallest_eigenvalues(&l, &m, 4)?[0])
}

pub fn lambda1_estimate(patch: &SurfacePatch, n_theta: usize, n_phi: usize) -> Result<Lambda1Estimate> {
    let fine = lambda1_at(patch, n_theta, n_phi)?;
    let coarse = lambda1_at(patch, (n_theta / 2).max(4), (n_phi / 2).max(8))?;
    Ok(Lambda1Estimate {
        n_theta,
        n_phi,
        lambda1: fine,
        coarse,
        refinement_gap: (fine - coarse).abs(),
    })
}
