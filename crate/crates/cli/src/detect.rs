use mvgamma::corrstruct::{one_factorial_exact, tree_structure, Assemble};
use mvgamma::{BlockFactorialStructure, CorrelationMatrix, Error, Matrix, OneFactorialStructure, Result, TreeStructure};

const MATCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StructureKind {
    Auto,
    OneFactorial,
    Tree,
    TwoBlock,
    ThreeBlock,
}

#[derive(Debug, Clone)]
pub enum Detected {
    OneFactorial(OneFactorialStructure),
    Tree(TreeStructure),
    Block(BlockFactorialStructure),
}

impl Detected {
    pub fn name(&self) -> &'static str {
        match self {
            Detected::OneFactorial(_) => "one-factorial",
            Detected::Tree(_) => "tree",
            Detected::Block(s) if s.p() == 2 => "two-block",
            Detected::Block(_) => "three-block",
        }
    }
}

fn ranges(sizes: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut s = 0;
    sizes
        .iter()
        .map(|&k| {
            s += k;
            s - k..s
        })
        .collect()
}

/// Loadings and block factors reproducing `r` exactly, if there are any.
///
/// Within a block of size ≥ 3 the loadings are fixed by `a_μ² = r_μν r_μκ / r_νκ`.
/// A pair only fixes `a_μ a_ν`; the ratio is read off a cross entry. A
/// singleton loading is free, and is chosen so that its largest cross
/// factor is 1 where possible.
pub fn block_exact(r: &CorrelationMatrix, sizes: &[usize]) -> Option<BlockFactorialStructure> {
    let m = r.matrix();
    let n = r.n();
    if sizes.iter().sum::<usize>() != n || sizes.len() < 2 {
        return None;
    }
    let rs = ranges(sizes);
    let mut a = vec![0.0f64; n];
    for range in &rs {
        let idx: Vec<usize> = range.clone().collect();
        match idx.len() {
            1 => {}
            2 => {
                let (i, j) = (idx[0], idx[1]);
                let prod = m[(i, j)];
                if !(prod > 0.0) {
                    return None;
                }
                let ratio = (0..n)
                    .filter(|v| !range.contains(v))
                    .find(|&v| m[(i, v)].abs() > MATCH_TOL && m[(j, v)].abs() > MATCH_TOL)
                    .map_or(1.0, |v| m[(i, v)] / m[(j, v)]);
                if !(ratio > 0.0) {
                    return None;
                }
                a[i] = (prod * ratio).sqrt();
                a[j] = (prod / ratio).sqrt();
            }
            _ => {
                for (k, &mu) in idx.iter().enumerate() {
                    let nu = idx[(k + 1) % idx.len()];
                    let kappa = idx[(k + 2) % idx.len()];
                    let sq = m[(mu, nu)] * m[(mu, kappa)] / m[(nu, kappa)];
                    if !(sq > 0.0 && m[(mu, nu)] > 0.0) {
                        return None;
                    }
                    a[mu] = sq.sqrt();
                }
            }
        }
    }
    for range in rs.iter().filter(|r| r.len() == 1) {
        let mu = range.start;
        let best = (0..n)
            .filter(|&v| v != mu)
            .map(|v| if a[v] > 0.0 { m[(mu, v)].abs() / a[v] } else { m[(mu, v)].abs().sqrt() })
            .fold(0.0, f64::max);
        a[mu] = if best > 0.0 { best.clamp(0.05, 0.99) } else { 0.5 };
    }
    if a.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return None;
    }
    let p = sizes.len();
    let theta = Matrix::from_fn(p, |j, k| if j == k { 1.0 } else { m[(rs[j].start, rs[k].start)] / (a[rs[j].start] * a[rs[k].start]) });
    let s = BlockFactorialStructure::new(sizes.to_vec(), a, theta).ok()?;
    let fitted = s.assembled_matrix();
    let close = (0..n).all(|i| (0..n).all(|j| (fitted[(i, j)] - m[(i, j)]).abs() <= MATCH_TOL));
    close.then_some(s)
}

fn splits(n: usize, p: usize) -> Vec<Vec<usize>> {
    match p {
        2 => (1..n).map(|k| vec![k, n - k]).collect(),
        _ => (1..n).flat_map(|i| (1..n - i).map(move |j| vec![i, j, n - i - j])).collect(),
    }
}

fn block_with(r: &CorrelationMatrix, p: usize, sizes: Option<&[usize]>) -> Option<BlockFactorialStructure> {
    match sizes {
        Some(s) if s.len() == p => block_exact(r, s),
        Some(_) => None,
        None => splits(r.n(), p).iter().find_map(|s| block_exact(r, s)),
    }
}

/// Structure of `r`, trying one-factorial, tree, two-block and three-block
/// in that order unless `kind` names one.
pub fn detect(r: &CorrelationMatrix, kind: StructureKind, sizes: Option<&[usize]>) -> Result<Detected> {
    let one = || one_factorial_exact(r, MATCH_TOL).map(Detected::OneFactorial);
    let tree = || tree_structure(r, None).map(Detected::Tree);
    let two = || block_with(r, 2, sizes).map(Detected::Block);
    let three = || block_with(r, 3, sizes).map(Detected::Block);
    let found = match kind {
        StructureKind::Auto => one().or_else(tree).or_else(two).or_else(three),
        StructureKind::OneFactorial => one(),
        StructureKind::Tree => tree(),
        StructureKind::TwoBlock => two(),
        StructureKind::ThreeBlock => three(),
    };
    found.ok_or_else(|| {
        let what = match kind {
            StructureKind::Auto => "any supported structure (one-factorial, tree, two-block, three-block)".to_string(),
            k => format!("the requested {k:?} structure"),
        };
        let blocks = sizes.map_or(String::new(), |s| format!(" with blocks {s:?}"));
        Error::Precondition { module: "cli", msg: format!("matrix does not match {what}{blocks}") }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_block_structures() {
        let s = BlockFactorialStructure::two_block(2, vec![0.4, 0.6, 0.5, 0.7], 0.8).unwrap();
        let r = s.assemble().unwrap();
        let d = block_exact(&r, &[2, 2]).unwrap();
        let back = d.assembled_matrix();
        assert!((0..4).all(|i| (0..4).all(|j| (back[(i, j)] - r.get(i, j)).abs() < 1e-12)));
        assert!(block_exact(&r, &[1, 3]).is_none());
        let t = BlockFactorialStructure::three_block([1, 2, 3], vec![0.5, 0.6, 0.4, 0.3, 0.5, 0.7], [0.3, 0.2, 0.4]).unwrap();
        let r = t.assemble().unwrap();
        assert!(matches!(detect(&r, StructureKind::Auto, None).unwrap(), Detected::Block(b) if b.p() == 3));
    }
}
