//! Jack polynomials `C_κ^β` evaluated at a real spectrum.
//!
//! Values are built variable by variable with the branching rule
//!
//! ```text
//! P_κ(x_1..x_n) = Σ_μ P_μ(x_1..x_{n-1}) x_n^{|κ|-|μ|} ψ_κμ
//! ```
//!
//! where `μ` runs over partitions interlacing `κ` (so that `κ/μ` is a
//! horizontal strip) and `ψ_κμ` is a ratio of upper and lower hook lengths.
//! The `P` normalization (leading monomial coefficient 1) keeps magnitudes
//! bounded; conversion to the `C` normalization, in which every degree layer
//! sums to `(tr X)^k`, is a per-partition constant.
//!
//! Evaluation happens at the spectrum rescaled to `max |x_i| = 1`, and the
//! scale is restored by homogeneity (`C_κ(cX) = c^{|κ|} C_κ(X)`), so deep
//! layers do not overflow.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::algebra::AlgebraDim;
use crate::error::{Error, Result};
use crate::partition::{enumerate_partitions, Partition};
use crate::special::{gen_pochhammer, ln_gamma};

/// Eigenvalues of a Hermitian matrix, kept in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("spectrum must have at least one value".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("spectrum entries must be finite (got {bad})")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum(values))
    }

    /// `m` copies of `value`.
    pub fn constant(value: f64, m: usize) -> Result<Self> {
        Spectrum::new(vec![value; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn largest(&self) -> f64 {
        self.0[0]
    }

    pub fn smallest(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Every entry multiplied by `c` (reordered if `c < 0`).
    pub fn scaled(&self, c: f64) -> Spectrum {
        let mut v: Vec<f64> = self.0.iter().map(|x| x * c).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        Spectrum(v)
    }

    /// Every entry plus `c`.
    pub fn shifted(&self, c: f64) -> Spectrum {
        Spectrum(self.0.iter().map(|x| x + c).collect())
    }

    /// Sum of `ln x_i`; `NaN`/`-inf` for non-positive entries.
    pub fn log_det(&self) -> f64 {
        self.0.iter().map(|x| x.ln()).sum()
    }
}

/// One partition in a [`Catalog`], with everything about it that does not
/// depend on the spectrum.
#[derive(Debug, Clone)]
pub(crate) struct CatalogNode {
    pub(crate) partition: Partition,
    /// `ln(α^k k! / Π h^*_κ)`, converting `P_κ` to `C_κ`.
    pub(crate) ln_p_to_c: f64,
    /// `ln C_κ(I_m)`.
    pub(crate) ln_identity: f64,
    /// κ with the last cell of its last row removed.
    pub(crate) parent: usize,
    /// 0-based (row, column) of that cell.
    pub(crate) cell: (u32, u32),
    /// `(μ, |κ| - |μ|, ψ_κμ)` for every horizontal strip `κ/μ` with `μ`
    /// having at most `m - 1` parts.
    strips: Vec<(usize, i32, f64)>,
}

/// Every partition with at most `m` parts up to some weight, with its
/// branching coefficients. Shared between tables with the same `(β, m)`.
#[derive(Debug, Clone)]
pub(crate) struct Catalog {
    beta: AlgebraDim,
    m: usize,
    pub(crate) nodes: Vec<CatalogNode>,
    index: HashMap<Partition, usize>,
    /// `layers[k]` holds node ids of weight `k` in lexicographically decreasing order.
    layers: Vec<Vec<usize>>,
}

impl Catalog {
    fn new(beta: AlgebraDim, m: usize) -> Self {
        let empty = Partition::empty();
        let mut index = HashMap::new();
        index.insert(empty.clone(), 0);
        Catalog {
            beta,
            m,
            nodes: vec![CatalogNode {
                partition: empty,
                ln_p_to_c: 0.0,
                ln_identity: 0.0,
                parent: 0,
                cell: (0, 0),
                strips: vec![],
            }],
            index,
            layers: vec![vec![0]],
        }
    }

    fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    fn push_layer(&mut self) {
        let k = self.layers.len();
        let alpha = self.beta.alpha();
        let mut ids = Vec::new();
        for p in enumerate_partitions(k as u32, self.m) {
            let conj = p.conjugate();
            let last = p.len() - 1;
            let mut parent_parts = p.parts().to_vec();
            parent_parts[last] -= 1;
            let parent = self.index[&Partition::from_sorted_unchecked(parent_parts)];
            let id = self.nodes.len();
            // κ is its own strip (|κ/κ| = 0) when it has fewer than m parts
            self.index.insert(p.clone(), id);
            let strips = self.strips(&p, &conj, alpha);
            let node = CatalogNode {
                ln_p_to_c: ln_p_to_c(&p, &conj, alpha),
                ln_identity: jack_identity_log(&p, self.m, self.beta),
                parent,
                cell: (last as u32, p.part(last) - 1),
                strips,
                partition: p,
            };
            self.nodes.push(node);
            ids.push(id);
        }
        self.layers.push(ids);
    }

    /// Horizontal strips `κ/μ` with `μ_i ∈ [κ_{i+1}, κ_i]` for `i < m - 1`.
    fn strips(&self, kappa: &Partition, kappa_conj: &Partition, alpha: f64) -> Vec<(usize, i32, f64)> {
        let slots = self.m - 1;
        if kappa.len() > slots + 1 {
            return vec![];
        }
        let lo: Vec<u32> = (0..slots).map(|i| kappa.part(i + 1)).collect();
        let hi: Vec<u32> = (0..slots).map(|i| kappa.part(i)).collect();
        let k = kappa.weight();
        let mut mu = lo.clone();
        let mut out = Vec::new();
        loop {
            let mu_p = Partition::from_sorted_unchecked(mu.clone());
            let id = self.index[&mu_p];
            let psi = psi(kappa, kappa_conj, &mu_p, &mu_p.conjugate(), alpha);
            out.push((id, (k - mu_p.weight()) as i32, psi));
            // odometer over the interlacing box
            let mut i = 0;
            loop {
                if i == slots {
                    return out;
                }
                if mu[i] < hi[i] {
                    mu[i] += 1;
                    break;
                }
                mu[i] = lo[i];
                i += 1;
            }
        }
    }
}

type CatalogKey = (u32, usize);

static CATALOGS: OnceLock<Mutex<HashMap<CatalogKey, Arc<Catalog>>>> = OnceLock::new();

/// The shared catalog for `(β, m)`, grown to at least `depth`.
fn shared_catalog(beta: AlgebraDim, m: usize, depth: usize) -> Arc<Catalog> {
    let registry = CATALOGS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = registry.lock().unwrap_or_else(|e| e.into_inner());
    let entry = map.entry((beta.beta(), m)).or_insert_with(|| Arc::new(Catalog::new(beta, m)));
    if entry.depth() < depth {
        let mut grown = Catalog::clone(entry);
        let target = depth.max(grown.depth() + 8);
        while grown.depth() < target {
            grown.push_layer();
        }
        *entry = Arc::new(grown);
    }
    Arc::clone(entry)
}

/// Memoized Jack values for one spectrum, grown one degree layer at a time.
///
/// Holds every partition of every weight up to [`JackTable::max_weight`] with
/// at most `m` parts. Once built it is read-only and can be shared.
#[derive(Debug, Clone)]
pub struct JackTable {
    spectrum: Spectrum,
    beta: AlgebraDim,
    scale: f64,
    scaled: Vec<f64>,
    catalog: Arc<Catalog>,
    depth: usize,
    /// `levels[n][id] = P_κ(x̃_1, ..., x̃_n)`.
    levels: Vec<Vec<f64>>,
}

impl JackTable {
    /// A table holding only the constant layer.
    pub fn new(spectrum: &Spectrum, beta: AlgebraDim) -> Self {
        let m = spectrum.len();
        let scale = spectrum.max_abs();
        let scaled = if scale > 0.0 { spectrum.values().iter().map(|x| x / scale).collect() } else { vec![0.0; m] };
        JackTable {
            spectrum: spectrum.clone(),
            beta,
            scale,
            scaled,
            catalog: shared_catalog(beta, m, 0),
            depth: 0,
            levels: vec![vec![1.0]; m + 1],
        }
    }

    /// A table complete through weight `max_weight`.
    pub fn build(spectrum: &Spectrum, beta: AlgebraDim, max_weight: usize) -> Self {
        let mut table = JackTable::new(spectrum, beta);
        table.extend_to(max_weight);
        table
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn beta(&self) -> AlgebraDim {
        self.beta
    }

    pub fn m(&self) -> usize {
        self.spectrum.len()
    }

    pub fn max_weight(&self) -> usize {
        self.depth
    }

    /// `max |x_i|`; values from [`JackTable::layer_scaled`] must be multiplied
    /// by `scale^k` to recover `C_κ(X)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Adds layers until the table holds every weight up to `k`.
    pub fn extend_to(&mut self, k: usize) {
        if k <= self.depth {
            return;
        }
        if self.catalog.depth() < k {
            self.catalog = shared_catalog(self.beta, self.m(), k);
        }
        while self.depth < k {
            self.push_layer();
        }
    }

    fn push_layer(&mut self) {
        let k = self.depth + 1;
        let m = self.m();
        let catalog = Arc::clone(&self.catalog);
        let ids = &catalog.layers[k];
        let end = ids.last().map_or(0, |&id| id + 1);
        for level in self.levels.iter_mut() {
            level.resize(end, 0.0);
        }
        let mut powers = vec![1.0; k + 1];
        for n in 1..=m {
            let x = self.scaled[n - 1];
            for d in 1..=k {
                powers[d] = powers[d - 1] * x;
            }
            let (lower, upper) = self.levels.split_at_mut(n);
            let prev = &lower[n - 1];
            let current = &mut upper[0];
            for &id in ids {
                let node = &catalog.nodes[id];
                if node.partition.len() > n {
                    continue;
                }
                let mut total = 0.0;
                for &(mu, d, psi) in &node.strips {
                    total += prev[mu] * powers[d as usize] * psi;
                }
                current[id] = total;
            }
        }
        self.depth = k;
        debug_assert!(self.layer_sum_defect(k) <= 1e-8, "Jack layer {k} fails the trace identity");
    }

    fn layer_sum_defect(&self, k: usize) -> f64 {
        let m = self.m();
        let sum: f64 =
            self.catalog.layers[k].iter().map(|&id| self.catalog.nodes[id].ln_p_to_c.exp() * self.levels[m][id]).sum();
        let trace: f64 = self.scaled.iter().sum();
        let abs_trace: f64 = self.scaled.iter().map(|v| v.abs()).sum();
        let denom = abs_trace.powi(k as i32).max(f64::MIN_POSITIVE);
        (sum - trace.powi(k as i32)).abs() / denom
    }

    pub(crate) fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    /// Number of catalog nodes covered by the computed layers.
    pub(crate) fn node_count(&self) -> usize {
        self.levels[0].len()
    }

    /// Node ids and `C_κ(X / scale)` for weight `k`.
    pub(crate) fn layer_ids(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        assert!(k <= self.depth, "layer {k} is beyond the table depth {}", self.depth);
        let m = self.m();
        self.catalog.layers[k].iter().map(move |&id| (id, self.catalog.nodes[id].ln_p_to_c.exp() * self.levels[m][id]))
    }

    /// Partitions of weight `k` (at most `m` parts) paired with `C_κ(X / scale)`.
    ///
    /// Panics if `k` exceeds [`JackTable::max_weight`].
    pub fn layer_scaled(&self, k: usize) -> impl Iterator<Item = (&Partition, f64)> + '_ {
        self.layer_ids(k).map(move |(id, v)| (&self.catalog.nodes[id].partition, v))
    }

    /// `C_κ(X)` for every partition of weight `k`, in lexicographically
    /// decreasing order. Panics if `k` exceeds [`JackTable::max_weight`].
    pub fn layer(&self, k: usize) -> Vec<(Partition, f64)> {
        let factor = self.scale.powi(k as i32);
        self.layer_scaled(k).map(|(p, v)| (p.clone(), v * factor)).collect()
    }

    /// `C_κ(X)`, or `None` when `|κ|` is beyond the table.
    pub fn get(&self, kappa: &Partition) -> Option<f64> {
        if kappa.len() > self.m() {
            return Some(0.0);
        }
        let k = kappa.weight() as usize;
        if k > self.depth {
            return None;
        }
        let id = self.catalog.index[kappa];
        let node = &self.catalog.nodes[id];
        Some(node.ln_p_to_c.exp() * self.levels[self.m()][id] * self.scale.powi(k as i32))
    }
}

/// `ψ_κμ` restricted to the cells that do not cancel: cells of μ lying in a
/// row that grows (κ_i ≠ μ_i) and a column that does not (κ'_j = μ'_j).
fn psi(kappa: &Partition, kappa_conj: &Partition, mu: &Partition, mu_conj: &Partition, alpha: f64) -> f64 {
    let mut value = 1.0;
    for i in 0..mu.len() {
        let (ki, mi) = (kappa.part(i), mu.part(i));
        if ki == mi {
            continue;
        }
        for j in 0..mi as usize {
            let (kc, mc) = (kappa_conj.part(j), mu_conj.part(j));
            if kc != mc {
                continue;
            }
            let leg = kc as f64 - i as f64 - 1.0;
            let arm_k = ki as f64 - j as f64 - 1.0;
            let arm_m = mi as f64 - j as f64 - 1.0;
            let upper_k = leg + alpha * (arm_k + 1.0);
            let lower_k = leg + 1.0 + alpha * arm_k;
            let upper_m = leg + alpha * (arm_m + 1.0);
            let lower_m = leg + 1.0 + alpha * arm_m;
            value *= upper_k * lower_m / (lower_k * upper_m);
        }
    }
    value
}

/// Upper and lower hook lengths of cell `(i, j)` (0-based).
fn hooks(kappa: &Partition, conj: &Partition, i: usize, j: usize, alpha: f64) -> (f64, f64) {
    let leg = conj.part(j) as f64 - i as f64 - 1.0;
    let arm = kappa.part(i) as f64 - j as f64 - 1.0;
    (leg + alpha * (arm + 1.0), leg + 1.0 + alpha * arm)
}

fn ln_p_to_c(kappa: &Partition, conj: &Partition, alpha: f64) -> f64 {
    let k = kappa.weight() as f64;
    let mut ln_upper = 0.0;
    for (i, &row) in kappa.parts().iter().enumerate() {
        for j in 0..row as usize {
            ln_upper += hooks(kappa, conj, i, j, alpha).0.ln();
        }
    }
    k * alpha.ln() + ln_gamma(k + 1.0) - ln_upper
}

/// `ln C_κ^β(I_m)` in closed form: `α^{2k} k! [mβ/2]_κ / Π h^* h_*`.
///
/// Returns `-inf` when κ has more than `m` parts.
pub fn jack_identity_log(kappa: &Partition, m: usize, beta: AlgebraDim) -> f64 {
    if kappa.len() > m {
        return f64::NEG_INFINITY;
    }
    let alpha = beta.alpha();
    let conj = kappa.conjugate();
    let k = kappa.weight() as f64;
    let mut ln_hooks = 0.0;
    for (i, &row) in kappa.parts().iter().enumerate() {
        for j in 0..row as usize {
            let (u, l) = hooks(kappa, &conj, i, j, alpha);
            ln_hooks += u.ln() + l.ln();
        }
    }
    let poch = gen_pochhammer(m as f64 * beta.beta_f64() / 2.0, kappa, beta);
    2.0 * k * alpha.ln() + ln_gamma(k + 1.0) + poch.ln() - ln_hooks
}

/// `C_κ^β(X)` for `X` with spectrum `x`. Zero when κ has more parts than `x`
/// has entries.
pub fn jack_c(kappa: &Partition, x: &Spectrum, beta: AlgebraDim) -> f64 {
    if kappa.len() > x.len() {
        return 0.0;
    }
    let table = JackTable::build(x, beta, kappa.weight() as usize);
    table.get(kappa).expect("table was built through |κ|")
}

/// `C_κ^β(X)` for every partition of weight `k` with at most `m` parts.
pub fn jack_layer(k: usize, x: &Spectrum, beta: AlgebraDim) -> Vec<(Partition, f64)> {
    JackTable::build(x, beta, k).layer(k)
}
