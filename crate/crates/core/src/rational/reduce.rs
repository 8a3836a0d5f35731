//! Removing useless states.

use nalgebra::{DMatrix, DVector};

use super::LinearRep;

/// Restrict to states that are both reachable from the support of `ι` and
/// able to reach the support of `τ` along nonzero transitions. The series is
/// unchanged. May return a representation of dimension 0.
pub fn trim(rep: &LinearRep) -> LinearRep {
    let n = rep.dim();
    let edge = |i: usize, j: usize| rep.matrices().iter().any(|m| m[(i, j)] != 0.0);
    let closure = |start: Vec<bool>, forward: bool| {
        let mut seen = start;
        let mut stack: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let linked = if forward { edge(i, j) } else { edge(j, i) };
                if linked && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    };
    let accessible = closure(rep.iota().iter().map(|&x| x != 0.0).collect(), true);
    let coaccessible = closure(rep.tau().iter().map(|&x| x != 0.0).collect(), false);
    let keep: Vec<usize> = (0..n).filter(|&i| accessible[i] && coaccessible[i]).collect();
    restrict(rep, &keep)
}

fn restrict(rep: &LinearRep, keep: &[usize]) -> LinearRep {
    let m = keep.len();
    LinearRep::new(
        rep.alphabet().to_vec(),
        DVector::from_fn(m, |i, _| rep.iota()[keep[i]]),
        rep.matrices().iter().map(|a| DMatrix::from_fn(m, m, |i, j| a[(keep[i], keep[j])])).collect(),
        DVector::from_fn(m, |i, _| rep.tau()[keep[i]]),
    )
    .expect("restriction preserves shapes")
}

/// Orthonormal basis of the smallest subspace containing `seed` and closed
/// under every map in `maps`.
fn krylov_basis(seed: &DVector<f64>, maps: &[DMatrix<f64>], tol: f64) -> DMatrix<f64> {
    let n = seed.len();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let push = |v: DVector<f64>, basis: &mut Vec<DVector<f64>>| {
        let scale = v.norm();
        let mut r = v;
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dot(&r);
                r -= b * c;
            }
        }
        let norm = r.norm();
        if norm > tol * scale.max(1.0) {
            basis.push(r / norm);
            true
        } else {
            false
        }
    };
    push(seed.clone(), &mut basis);
    let mut next = 0;
    while next < basis.len() && basis.len() < n {
        let b = basis[next].clone();
        for m in maps {
            push(m * &b, &mut basis);
        }
        next += 1;
    }
    if basis.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&basis)
}

/// Forward-backward reduction to a minimal representation of the same series.
/// Nonnegativity is not preserved.
pub fn minimize(rep: &LinearRep, tol: f64) -> LinearRep {
    let forward = {
        let maps: Vec<DMatrix<f64>> = rep.matrices().iter().map(|m| m.transpose()).collect();
        project(rep, &krylov_basis(rep.iota(), &maps, tol))
    };
    project(&forward, &krylov_basis(forward.tau(), forward.matrices(), tol))
}

/// `⟨Bᵀι, BᵀMₓB, Bᵀτ⟩` for orthonormal `B` spanning an invariant subspace.
fn project(rep: &LinearRep, b: &DMatrix<f64>) -> LinearRep {
    let bt = b.transpose();
    LinearRep::new(
        rep.alphabet().to_vec(),
        &bt * rep.iota(),
        rep.matrices().iter().map(|m| &bt * m * b).collect(),
        &bt * rep.tau(),
    )
    .expect("projection preserves shapes")
}
