//! P1 finite elements on disk meshes: assembly and solution of
//! `-div(sigma grad u) = rhs` with Dirichlet data, plus the discrete calculus
//! the reconstruction needs (elementwise gradients, nodal projections,
//! weak-divergence load vectors, mass-matrix norms).
//!
//! The conductivity is consumed as one constant per triangle, so every
//! integrand below is elementwise polynomial of degree at most two and all
//! quadrature is exact.  Dirichlet conditions are eliminated: constrained
//! rows and columns are dropped and the known values moved to the load, which
//! keeps the reduced system symmetric positive definite.  That system is
//! solved by conjugate gradients with diagonal (Jacobi) preconditioning at
//! relative tolerance 1e-12 with an iteration cap of `20 * sqrt(free nodes)`.

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTrace, ElementField, ElementVectorField, Mesh, NodalField, NodalVectorField};

/// Right-hand side of a Dirichlet solve.
pub enum LoadSpec<'a> {
    /// Homogeneous equation.
    Zero,
    /// A source term sampled at the nodes; integrated with the exact P1 mass matrix.
    NodalSamples(&'a NodalField),
    /// A precomputed weak-form vector, one entry per node.
    WeakForm(&'a [f64]),
}

const CG_TOLERANCE: f64 = 1e-12;

/// Symmetric sparse system in compressed row form, after constraint elimination.
pub struct SparseSystem {
    /// Dimension (number of free nodes).
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
    /// Load vector for the free nodes.
    pub rhs: Vec<f64>,
    /// Free index of each node, `None` for constrained nodes.
    pub free_index: Vec<Option<usize>>,
    /// Prescribed value at each node (`Some` exactly for constrained nodes).
    pub prescribed: Vec<Option<f64>>,
}

impl SparseSystem {
    /// y = A x on the free unknowns.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// Largest absolute asymmetry `|A_ij - A_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let mut aji = 0.0;
                for m in self.row_ptr[j]..self.row_ptr[j + 1] {
                    if self.col_idx[m] == i {
                        aji = self.values[m];
                        break;
                    }
                }
                worst = worst.max((self.values[k] - aji).abs());
            }
        }
        worst
    }

    /// Relative residual `||b - Ax|| / ||b||` of a candidate solution
    /// (nodal, including constrained entries).
    pub fn relative_residual(&self, u: &NodalField) -> f64 {
        let x: Vec<f64> = (0..self.free_index.len())
            .filter_map(|n| self.free_index[n].map(|_| u.values[n]))
            .collect();
        let mut ax = vec![0.0; self.dim];
        self.apply(&x, &mut ax);
        let mut rr = 0.0;
        let mut bb = 0.0;
        for i in 0..self.dim {
            rr += (self.rhs[i] - ax[i]).powi(2);
            bb += self.rhs[i].powi(2);
        }
        if bb == 0.0 {
            rr.sqrt()
        } else {
            (rr / bb).sqrt()
        }
    }
}

/// Element stiffness scatter: assemble the constrained system for
/// `-div(sigma grad u) = load`, `u = boundary_values` on the boundary.
pub fn assemble_dirichlet(
    mesh: &Mesh,
    sigma: &ElementField,
    load: &LoadSpec,
    boundary_values: &BoundaryTrace,
) -> Result<SparseSystem> {
    if sigma.values.len() != mesh.triangle_count() {
        return Err(Error::Parameter("sigma has wrong length".into()));
    }
    if let Some((t, &s)) = sigma
        .values
        .iter()
        .enumerate()
        .find(|(_, &s)| !(s > 0.0) || !s.is_finite())
    {
        return Err(Error::Ellipticity(format!(
            "sigma = {s} on element {t}; a positive lower bound is required"
        )));
    }

    let n = mesh.node_count();
    let mut prescribed: Vec<Option<f64>> = vec![None; n];
    for (&b, &g) in mesh.boundary_nodes().iter().zip(boundary_values.values.iter()) {
        prescribed[b] = Some(g);
    }
    let mut free_index: Vec<Option<usize>> = vec![None; n];
    let mut n_free = 0;
    for i in 0..n {
        if prescribed[i].is_none() {
            free_index[i] = Some(n_free);
            n_free += 1;
        }
    }

    // Full-length load vector first, then restriction to the free nodes.
    let mut full_load = vec![0.0; n];
    match load {
        LoadSpec::Zero => {}
        LoadSpec::NodalSamples(f) => apply_mass(mesh, &f.values, &mut full_load),
        LoadSpec::WeakForm(v) => {
            if v.len() != n {
                return Err(Error::Parameter("weak-form load has wrong length".into()));
            }
            full_load.copy_from_slice(v);
        }
    }
    let mut rhs: Vec<f64> = (0..n)
        .filter(|&i| free_index[i].is_some())
        .map(|i| full_load[i])
        .collect();

    // Row-wise accumulation, then compression.
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_free];
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let grads = mesh.basis_gradients(t);
        let coeff = sigma.values[t] * mesh.triangle_area(t);
        for a in 0..3 {
            let ga = free_index[tri[a]];
            for b in 0..3 {
                let k_ab = coeff * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                match (ga, prescribed[tri[b]]) {
                    (Some(ia), None) => {
                        let ib = free_index[tri[b]].unwrap();
                        rows[ia].push((ib, k_ab));
                    }
                    (Some(ia), Some(g)) => rhs[ia] -= k_ab * g,
                    (None, _) => {}
                }
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(n_free + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for row in &mut rows {
        row.sort_unstable_by_key(|&(j, _)| j);
        let mut last: Option<usize> = None;
        for &(j, v) in row.iter() {
            if last == Some(j) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                last = Some(j);
            }
        }
        row_ptr.push(col_idx.len());
    }

    Ok(SparseSystem {
        dim: n_free,
        row_ptr,
        col_idx,
        values,
        rhs,
        free_index,
        prescribed,
    })
}

/// Jacobi-preconditioned conjugate gradients on an assembled system.
pub fn cg_solve(system: &SparseSystem) -> Result<Vec<f64>> {
    let n = system.dim;
    if n == 0 {
        return Ok(Vec::new());
    }
    let b_norm = system.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            let mut d = 0.0;
            for k in system.row_ptr[i]..system.row_ptr[i + 1] {
                if system.col_idx[k] == i {
                    d = system.values[k];
                    break;
                }
            }
            if d <= 0.0 {
                1.0
            } else {
                1.0 / d
            }
        })
        .collect();

    let max_iter = (20.0 * (n as f64).sqrt()).ceil() as usize;
    let mut x = vec![0.0; n];
    let mut r = system.rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];

    for it in 0..max_iter {
        system.apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::SolverDiverged {
                iterations: it,
                residual: f64::NAN,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= CG_TOLERANCE * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    Err(Error::SolverDiverged {
        iterations: max_iter,
        residual: r_norm / b_norm,
    })
}

/// Galerkin solution of the Dirichlet problem.  See module docs for the
/// discretization and solver choices.
pub fn solve_dirichlet(
    mesh: &Mesh,
    sigma: &ElementField,
    load: &LoadSpec,
    boundary_values: &BoundaryTrace,
) -> Result<NodalField> {
    let system = assemble_dirichlet(mesh, sigma, load, boundary_values)?;
    let x = cg_solve(&system)?;
    let mut values = vec![0.0; mesh.node_count()];
    for i in 0..mesh.node_count() {
        values[i] = match system.free_index[i] {
            Some(fi) => x[fi],
            None => system.prescribed[i].unwrap(),
        };
    }
    NodalField::new(mesh, values)
}

/// Per-triangle constant gradient of the P1 interpolant of `u`.
pub fn gradient(mesh: &Mesh, u: &NodalField) -> ElementVectorField {
    let values = (0..mesh.triangle_count())
        .map(|t| {
            let tri = mesh.triangles()[t];
            let grads = mesh.basis_gradients(t);
            let mut g = [0.0; 2];
            for k in 0..3 {
                g[0] += u.values[tri[k]] * grads[k][0];
                g[1] += u.values[tri[k]] * grads[k][1];
            }
            g
        })
        .collect();
    ElementVectorField { values }
}

/// Area-weighted average of adjacent element values at each node.
pub fn element_to_node(mesh: &Mesh, e: &ElementField) -> NodalField {
    let mut num = vec![0.0; mesh.node_count()];
    let mut den = vec![0.0; mesh.node_count()];
    for t in 0..mesh.triangle_count() {
        let a = mesh.triangle_area(t);
        for &v in &mesh.triangles()[t] {
            num[v] += a * e.values[t];
            den[v] += a;
        }
    }
    NodalField {
        values: num.iter().zip(&den).map(|(n, d)| n / d).collect(),
    }
}

/// Componentwise area-weighted projection of an element 2-vector field.
pub fn element_to_node_vector(mesh: &Mesh, e: &ElementVectorField) -> NodalVectorField {
    let mut num = vec![[0.0; 2]; mesh.node_count()];
    let mut den = vec![0.0; mesh.node_count()];
    for t in 0..mesh.triangle_count() {
        let a = mesh.triangle_area(t);
        for &v in &mesh.triangles()[t] {
            num[v][0] += a * e.values[t][0];
            num[v][1] += a * e.values[t][1];
            den[v] += a;
        }
    }
    NodalVectorField {
        values: num
            .iter()
            .zip(&den)
            .map(|(n, d)| [n[0] / d, n[1] / d])
            .collect(),
    }
}

/// Weak-form load vector of a divergence source: `load(v) = integral F . grad v`
/// for each P1 test function `v`.  Both factors are constant per triangle, so
/// the per-element quadrature is exact.
pub fn weak_divergence_load(mesh: &Mesh, f: &ElementVectorField) -> Vec<f64> {
    let mut load = vec![0.0; mesh.node_count()];
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let grads = mesh.basis_gradients(t);
        let a = mesh.triangle_area(t);
        for k in 0..3 {
            load[tri[k]] += a * (f.values[t][0] * grads[k][0] + f.values[t][1] * grads[k][1]);
        }
    }
    load
}

/// y += M x with the exact P1 mass matrix.
pub fn apply_mass(mesh: &Mesh, x: &[f64], y: &mut [f64]) {
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let w = mesh.triangle_area(t) / 12.0;
        for a in 0..3 {
            for b in 0..3 {
                let m = if a == b { 2.0 } else { 1.0 };
                y[tri[a]] += w * m * x[tri[b]];
            }
        }
    }
}

/// Exact L2 norm of the P1 interpolant (consistent mass matrix).
pub fn l2_norm(mesh: &Mesh, field: &NodalField) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangles()[t];
        let (va, vb, vc) = (field.values[a], field.values[b], field.values[c]);
        s += mesh.triangle_area(t) / 6.0
            * (va * va + vb * vb + vc * vc + va * vb + va * vc + vb * vc);
    }
    s.sqrt()
}

/// `||candidate - reference||_L2 / ||reference||_L2` with exact P1 quadrature.
pub fn relative_l2_error(mesh: &Mesh, candidate: &NodalField, reference: &NodalField) -> Result<f64> {
    let ref_norm = l2_norm(mesh, reference);
    if ref_norm == 0.0 {
        return Err(Error::ZeroNormReference);
    }
    let diff = NodalField {
        values: candidate
            .values
            .iter()
            .zip(&reference.values)
            .map(|(c, r)| c - r)
            .collect(),
    };
    Ok(l2_norm(mesh, &diff) / ref_norm)
}

/// Discrete weak-maximum-principle checker for a zero-load solution.
///
/// Returns the nodes where `u` leaves the band
/// `[min bc - eps, max bc + eps]` with `eps = 1e-8 * (max bc - min bc)`,
/// together with the worst excursion.  Empty when the principle holds.
pub fn max_principle_violations(
    u: &NodalField,
    boundary_values: &BoundaryTrace,
) -> Vec<(usize, f64)> {
    let lo = boundary_values.min();
    let hi = boundary_values.max();
    let eps = 1e-8 * (hi - lo).abs();
    let mut out = Vec::new();
    for (i, &v) in u.values.iter().enumerate() {
        if v < lo - eps {
            out.push((i, lo - v));
        } else if v > hi + eps {
            out.push((i, v - hi));
        }
    }
    out
}
