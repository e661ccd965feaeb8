use super::CorrelationMatrix;
use crate::real::Real;

/// Correlation matrix whose inverse is non-zero only on the edges of a
/// spanning tree.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TreeStructure<T> {
    pub n: usize,
    /// `(i, j, r^{ij})` with `i < j`.
    pub edges: Vec<(usize, usize, T)>,
    /// Diagonal `r^{ii}` of the inverse.
    pub diag: Vec<T>,
    pub det_r: T,
}

/// Tree structure of `R`, or `None` if the inverse does not have exactly
/// `n − 1` off-diagonal entries above the threshold forming a spanning tree.
/// The default threshold is `1e−8 · max |r^{ij}|`.
pub fn tree_structure<T: Real>(r: &CorrelationMatrix<T>, tol: Option<T>) -> Option<TreeStructure<T>> {
    let n = r.n();
    let inv = r.inverse();
    let mut biggest = T::zero();
    for i in 0..n {
        for &v in inv.row(i) {
            biggest = biggest.max(v.abs());
        }
    }
    let thr = tol.unwrap_or(T::lit(1e-8) * biggest);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = (inv[(i, j)] + inv[(j, i)]) / T::lit(2.0);
            if v.abs() > thr {
                edges.push((i, j, v));
            }
        }
    }
    if edges.len() + 1 != n {
        return None;
    }
    // n − 1 edges form a spanning tree iff they never close a cycle.
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(i, j, _) in &edges {
        let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
        if ri == rj {
            return None;
        }
        parent[ri] = rj;
    }
    Some(TreeStructure { n, edges, diag: (0..n).map(|i| inv[(i, i)]).collect(), det_r: r.det() })
}
