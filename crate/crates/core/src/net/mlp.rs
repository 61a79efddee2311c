use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowBatch, VelocityField};
use crate::manifold::{ManifoldSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Number of hidden (SiLU) layers.
    pub num_layers: usize,
    pub time_embed_dim: usize,
    pub cond_embed_dim: usize,
    /// Includes the null class, which always embeds to zeros.
    pub num_condition_classes: usize,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("input_dim", self.input_dim),
            ("hidden_dim", self.hidden_dim),
            ("num_layers", self.num_layers),
            ("time_embed_dim", self.time_embed_dim),
            ("cond_embed_dim", self.cond_embed_dim),
            ("num_condition_classes", self.num_condition_classes),
        ];
        for (name, v) in dims {
            if v < 1 {
                return Err(Error::invalid(name, "must be >= 1"));
            }
        }
        Ok(())
    }

    fn feature_dim(&self) -> usize {
        self.input_dim + self.time_embed_dim + self.cond_embed_dim
    }

    /// Named blocks of the flat parameter vector.
    pub fn layout(&self) -> Vec<ParamEntry> {
        let mut out = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, rows: usize, cols: usize| {
            out.push(ParamEntry { name, offset, len: rows * cols, rows, cols });
            offset += rows * cols;
        };
        // the null class (row 0 conceptually) is a fixed zero vector, not a parameter
        push("cond_embed".into(), self.num_condition_classes - 1, self.cond_embed_dim);
        let mut fan_in = self.feature_dim();
        for l in 0..self.num_layers {
            push(format!("hidden{l}.weight"), fan_in, self.hidden_dim);
            push(format!("hidden{l}.bias"), 1, self.hidden_dim);
            fan_in = self.hidden_dim;
        }
        push("out.weight".into(), self.hidden_dim, self.input_dim);
        push("out.bias".into(), 1, self.input_dim);
        out
    }

    pub fn param_count(&self) -> usize {
        self.layout().iter().map(|e| e.len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub offset: usize,
    pub len: usize,
    pub rows: usize,
    pub cols: usize,
}

/// Network weights stored in one flat vector. Structured views borrow
/// slices of it, so optimizer and EMA updates on the flat vector are what
/// the forward pass sees.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldParams {
    pub spec: NetworkSpec,
    pub flat: Vec<f64>,
    layout: Vec<ParamEntry>,
}

struct Cache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    last: Array2<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl VectorFieldParams {
    /// Variance-scaled normal hidden weights, zero biases, zero output
    /// layer, unit-normal condition embeddings.
    pub fn init<R: Rng + ?Sized>(spec: NetworkSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let layout = spec.layout();
        let mut flat = vec![0.0; spec.param_count()];
        for e in &layout {
            let block = &mut flat[e.offset..e.offset + e.len];
            if e.name == "cond_embed" {
                for v in block.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            } else if e.name.ends_with(".weight") && e.name.starts_with("hidden") {
                let std = (1.0 / e.rows as f64).sqrt();
                for v in block.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = std * z;
                }
            }
        }
        Ok(VectorFieldParams { spec, flat, layout })
    }

    pub fn from_flat(spec: NetworkSpec, flat: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if flat.len() != spec.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                spec.param_count(),
                flat.len()
            )));
        }
        Ok(VectorFieldParams { layout: spec.layout(), spec, flat })
    }

    pub fn layout(&self) -> &[ParamEntry] {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    fn entry(&self, name: &str) -> &ParamEntry {
        self.layout.iter().find(|e| e.name == name).expect("known parameter block")
    }

    /// Structured view of one named block.
    pub fn view(&self, name: &str) -> ArrayView2<'_, f64> {
        let e = self.entry(name);
        ArrayView2::from_shape((e.rows, e.cols), &self.flat[e.offset..e.offset + e.len]).expect("layout shape")
    }

    fn bias(&self, name: &str) -> ArrayView1<'_, f64> {
        let e = self.entry(name);
        ArrayView1::from(&self.flat[e.offset..e.offset + e.len])
    }

    /// Fills the output layer with small random values (the default init
    /// zeroes it). Useful for gradient checks and untrained test fields.
    pub fn randomize_output<R: Rng + ?Sized>(&mut self, scale: f64, rng: &mut R) {
        for name in ["out.weight", "out.bias"] {
            let e = self.entry(name).clone();
            for v in &mut self.flat[e.offset..e.offset + e.len] {
                let z: f64 = rng.sample(StandardNormal);
                *v = scale * z;
            }
        }
    }

    /// Embedding-table row of a condition; `None` for the null class.
    fn cond_row(&self, c: Option<usize>) -> Result<Option<usize>> {
        match c {
            None => Ok(None),
            Some(c) if c + 1 < self.spec.num_condition_classes => Ok(Some(c)),
            Some(class) => Err(Error::UnknownConditionClass {
                class,
                available: self.spec.num_condition_classes - 1,
            }),
        }
    }

    fn time_features(&self, t: f64, out: &mut [f64]) {
        let d = self.spec.time_embed_dim;
        let half = d / 2;
        let denom = (half.max(2) - 1) as f64;
        for i in 0..half {
            let w = (i as f64 * 100f64.ln() / denom).exp();
            out[2 * i] = (w * t).sin();
            out[2 * i + 1] = (w * t).cos();
        }
        if d % 2 == 1 {
            out[d - 1] = t;
        }
    }

    fn features(&self, xs: &[&[f64]], ts: &[f64], conds: &[Option<usize>]) -> Result<Array2<f64>> {
        let sp = &self.spec;
        let n = xs.len();
        if ts.len() != n || conds.len() != n {
            return Err(Error::ShapeMismatch("inputs, times and conditions differ in length".into()));
        }
        let emb = self.view("cond_embed");
        let mut f = Array2::zeros((n, sp.feature_dim()));
        for (i, mut row) in f.axis_iter_mut(Axis(0)).enumerate() {
            let x = xs[i];
            if x.len() != sp.input_dim {
                return Err(Error::DimensionMismatch { expected: sp.input_dim, got: x.len() });
            }
            let row = row.as_slice_mut().expect("row-major");
            row[..sp.input_dim].copy_from_slice(x);
            self.time_features(ts[i], &mut row[sp.input_dim..sp.input_dim + sp.time_embed_dim]);
            if let Some(c) = self.cond_row(conds[i])? {
                for (k, v) in emb.row(c).iter().enumerate() {
                    row[sp.input_dim + sp.time_embed_dim + k] = *v;
                }
            }
        }
        Ok(f)
    }

    fn run(&self, features: Array2<f64>) -> (Array2<f64>, Cache) {
        let mut inputs = Vec::with_capacity(self.spec.num_layers);
        let mut pre = Vec::with_capacity(self.spec.num_layers);
        let mut a = features;
        for l in 0..self.spec.num_layers {
            let z = a.dot(&self.view(&format!("hidden{l}.weight"))) + &self.bias(&format!("hidden{l}.bias"));
            let next = z.mapv(|v| v * sigmoid(v));
            inputs.push(a);
            pre.push(z);
            a = next;
        }
        let out = a.dot(&self.view("out.weight")) + &self.bias("out.bias");
        (out, Cache { inputs, pre, last: a })
    }

    /// Ambient outputs for a batch; row `i` is `v_θ(xs[i], ts[i], conds[i])`.
    pub fn forward_batch(&self, xs: &[&[f64]], ts: &[f64], conds: &[Option<usize>]) -> Result<Array2<f64>> {
        let f = self.features(xs, ts, conds)?;
        Ok(self.run(f).0)
    }

    pub fn forward(&self, x: &[f64], t: f64, cond: Option<usize>) -> Result<Vec<f64>> {
        Ok(self.forward_batch(&[x], &[t], &[cond])?.row(0).to_vec())
    }

    /// Reverse pass: gradient of `Σ_i ⟨d_out_i, v_θ(x_i)⟩` w.r.t. the flat vector.
    fn backward(&self, cache: &Cache, d_out: &Array2<f64>, conds: &[Option<usize>]) -> Result<Vec<f64>> {
        let sp = &self.spec;
        let mut grad = vec![0.0; self.flat.len()];
        let mut put = |name: &str, g: ArrayView2<f64>| {
            let e = self.entry(name);
            for (dst, src) in grad[e.offset..e.offset + e.len].iter_mut().zip(g.iter()) {
                *dst += src;
            }
        };
        put("out.weight", cache.last.t().dot(d_out).view());
        put("out.bias", d_out.sum_axis(Axis(0)).insert_axis(Axis(0)).view());
        let mut d_a = d_out.dot(&self.view("out.weight").t());
        for l in (0..sp.num_layers).rev() {
            let z = &cache.pre[l];
            let mut d_z = d_a;
            d_z.zip_mut_with(z, |g, &zv| {
                let s = sigmoid(zv);
                *g *= s * (1.0 + zv * (1.0 - s));
            });
            put(&format!("hidden{l}.weight"), cache.inputs[l].t().dot(&d_z).view());
            put(&format!("hidden{l}.bias"), d_z.sum_axis(Axis(0)).insert_axis(Axis(0)).view());
            d_a = d_z.dot(&self.view(&format!("hidden{l}.weight")).t());
        }
        let e = self.entry("cond_embed").clone();
        let start = sp.input_dim + sp.time_embed_dim;
        for (i, c) in conds.iter().enumerate() {
            let Some(row) = self.cond_row(*c)? else { continue };
            let d_in = d_a.slice(s![i, start..start + sp.cond_embed_dim]);
            for (k, g) in d_in.iter().enumerate() {
                grad[e.offset + row * sp.cond_embed_dim + k] += g;
            }
        }
        Ok(grad)
    }
}

/// Projected flow-matching loss of the network on `batch` and its exact
/// gradient with respect to the flat parameter vector.
pub fn loss_and_grad(
    params: &VectorFieldParams,
    manifold: &ManifoldSpec,
    batch: &FlowBatch,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let xs: Vec<&[f64]> = batch.x_t.iter().map(|p| p.as_slice()).collect();
    let f = params.features(&xs, &batch.t, &batch.condition)?;
    let (out, cache) = params.run(f);
    let n = batch.len() as f64;
    let dim = params.spec.input_dim;
    if manifold.total_ambient_dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: manifold.total_ambient_dim() });
    }
    let mut total = 0.0;
    let mut d_out = Array2::zeros((batch.len(), dim));
    for (i, (x, target)) in batch.x_t.iter().zip(&batch.target).enumerate() {
        let pred = out.row(i);
        let proj = manifold.project_tangent(x, pred.as_slice().expect("row-major"))?;
        let mut s = 0.0;
        let resid: Vec<f64> = target
            .iter()
            .zip(proj.iter())
            .map(|(a, b)| {
                s += (a - b) * (a - b);
                a - b
            })
            .collect();
        total += s;
        // d/dp ‖r − Π p‖² = −2 Πᵀ r and Π is an orthogonal projector
        let back = manifold.project_unchecked(x, &resid);
        for (k, g) in back.iter().enumerate() {
            d_out[[i, k]] = -2.0 * g / n;
        }
    }
    let grad = params.backward(&cache, &d_out, &batch.condition)?;
    Ok((total / n, grad))
}

impl VelocityField for VectorFieldParams {
    fn eval_batch(&self, xs: &[Point], t: f64, conds: &[Option<usize>]) -> Result<Vec<Vec<f64>>> {
        let rows: Vec<&[f64]> = xs.iter().map(|p| p.as_slice()).collect();
        let ts = vec![t; xs.len()];
        let out = self.forward_batch(&rows, &ts, conds)?;
        Ok(out.outer_iter().map(|r| r.to_vec()).collect())
    }
}
