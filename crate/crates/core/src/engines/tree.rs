use super::{EvalPoint, MODULE, SERIES_TOL};
use crate::corrstruct::TreeStructure;
use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use crate::specfun::{ln_gamma_pdf, ln_hyp0f1, NcGammaTable};
use crate::SeriesValue;

fn check_tree(t: &TreeStructure<f64>, alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(MODULE, format!("shape must be positive, got {alpha}")));
    }
    if t.diag.len() != t.n || t.edges.len() + 1 != t.n.max(1) {
        return Err(Error::domain(MODULE, "tree structure needs n diagonal entries and n - 1 edges"));
    }
    Ok(())
}

/// `ln((|R| Π r^{ii})^{−α})`.
fn ln_front(t: &TreeStructure<f64>, alpha: f64) -> f64 {
    -alpha * (t.det_r.ln() + t.diag.iter().map(|v| v.ln()).sum::<f64>())
}

/// Density of a tree-type correlation:
/// `(|R| Π r^{ii})^{−α} Π_i r^{ii} g_α(r^{ii} x_i) Π_{edges} ₀F₁(α; (r^{ij})² x_i x_j)`.
pub fn pdf_tree(x: &[f64], alpha: f64, t: &TreeStructure<f64>) -> Result<f64> {
    check_tree(t, alpha)?;
    if x.len() != t.n {
        return Err(Error::domain(MODULE, "point and tree differ in dimension"));
    }
    if let Some(v) = x.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(MODULE, format!("density arguments must be positive and finite, got {v}")));
    }
    let mut ln = ln_front(t, alpha);
    for (i, &xi) in x.iter().enumerate() {
        let r = t.diag[i];
        ln += r.ln() + ln_gamma_pdf(r * xi, alpha);
    }
    for &(i, j, rij) in &t.edges {
        ln += ln_hyp0f1(alpha, rij * rij * x[i] * x[j]);
    }
    Ok(ln.exp())
}

/// Rooted view of the tree: children lists and the parent edge weight.
struct Rooted {
    children: Vec<Vec<usize>>,
    parent_weight: Vec<f64>,
}

fn root_at_zero(t: &TreeStructure<f64>) -> Rooted {
    let n = t.n;
    let mut adj = vec![Vec::new(); n];
    for &(i, j, w) in &t.edges {
        adj[i].push((j, w));
        adj[j].push((i, w));
    }
    let mut children = vec![Vec::new(); n];
    let mut parent_weight = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(v, w) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                children[u].push(v);
                parent_weight[v] = w;
                stack.push(v);
            }
        }
    }
    Rooted { children, parent_weight }
}

struct TreeCdf<'a> {
    t: &'a TreeStructure<f64>,
    rooted: Rooted,
    x: &'a [f64],
    alpha: f64,
    leaf_tables: Vec<Option<NcGammaTable<f64>>>,
    tol: Tolerance<f64>,
    err: f64,
    ok: bool,
}

impl TreeCdf<'_> {
    /// `ln ∫_0^{x_c} r^{cc} g_α(r^{cc} v) ₀F₁(α; (r^{pc})² u v) Π_{d child of c} m_d(v) dv`,
    /// the message from `c` to its parent at parent value `u`.
    fn ln_message(&mut self, c: usize, u: f64) -> f64 {
        let r = self.t.diag[c];
        let w = self.rooted.parent_weight[c];
        if self.rooted.children[c].is_empty() {
            // ∫_0^x r g_α(r v) ₀F₁(α; κ r v) dv = e^κ G_α(r x; κ).
            let kappa = w * w * u / r;
            let table = self.leaf_tables[c].as_ref().expect("leaf table");
            let g = table.cdf(kappa, SERIES_TOL).value;
            return kappa + g.ln();
        }
        let alpha = self.alpha;
        let shift = ln_hyp0f1(alpha, w * w * u * self.x[c]);
        self.ln_integral(c, move |v| ln_hyp0f1(alpha, w * w * u * v), shift)
    }

    /// `ln ∫_0^{x_c} r g_α(r v) e^{edge(v)} Π_children m_d(v) dv`, with
    /// `shift` an approximate maximum of `edge` used for scaling.
    fn ln_integral(&mut self, c: usize, edge: impl Fn(f64) -> f64, shift: f64) -> f64 {
        let r = self.t.diag[c];
        let xc = self.x[c];
        let alpha = self.alpha;
        let children = self.rooted.children[c].clone();
        // v = x t^{1/α} removes the v^{α−1} endpoint behaviour for α < 1.
        let power = if alpha < 1.0 { 1.0 / alpha } else { 1.0 };
        let tol = self.tol;
        let mut err = 0.0;
        let mut ok = true;
        let res = {
            let this = &mut *self;
            integrate(
                |s| {
                    if s <= 0.0 {
                        return 0.0;
                    }
                    let v = xc * s.powf(power);
                    let jac = xc * power * s.powf(power - 1.0);
                    let mut ln = r.ln() + ln_gamma_pdf(r * v, alpha) + edge(v) - shift;
                    for &d in &children {
                        ln += this.ln_message(d, v);
                    }
                    jac * ln.exp()
                },
                0.0,
                1.0,
                &tol,
            )
        };
        err += res.abs_error_estimate / res.value.abs().max(1e-300);
        ok &= res.converged;
        self.err = self.err.max(err);
        self.ok &= ok;
        shift + res.value.ln()
    }
}

/// Cdf of a tree-type correlation by integrating the density along the
/// tree from the leaves to node 0. Leaves integrate in closed form
/// through the non-central gamma cdf; inner nodes use nested adaptive
/// quadrature, so the cost grows with the depth of the tree.
pub fn cdf_tree(p: &EvalPoint, t: &TreeStructure<f64>, tol: &Tolerance<f64>) -> Result<SeriesValue<f64>> {
    check_tree(t, p.alpha)?;
    p.check_dim(t.n)?;
    if p.x.iter().any(|v| v.is_infinite()) {
        return Err(Error::domain(MODULE, "tree cdf needs finite truncation points"));
    }
    let rooted = root_at_zero(t);
    let leaf_tables = (0..t.n)
        .map(|c| {
            if c != 0 && rooted.children[c].is_empty() {
                NcGammaTable::new(p.alpha, t.diag[c] * p.x[c]).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    // Inner integrals are rescaled, so only a relative target carries over to the value.
    let rel = (0.1 * tol.rel_tol.min(tol.abs_tol) / t.n as f64).max(1e-14);
    let inner = Tolerance { abs_tol: f64::MIN_POSITIVE, rel_tol: rel, max_subdivisions: tol.max_subdivisions };
    let mut run = TreeCdf { t, rooted, x: &p.x, alpha: p.alpha, leaf_tables, tol: inner, err: 0.0, ok: true };
    let ln_value = ln_front(t, p.alpha) + run.ln_integral(0, |_| 0.0, 0.0);
    let value = ln_value.exp();
    // Relative errors of nested integrals compound along the depth.
    let e = run.err * value * t.n as f64;
    Ok(SeriesValue {
        value: value.clamp(0.0, 1.0),
        abs_error_estimate: e,
        terms_used: 1,
        converged: run.ok && e <= tol.target(value),
    })
}
