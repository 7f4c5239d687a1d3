//! Factorization of Θ over orthogonal summands: when the model map is block
//! structured, the lattice sum of each monomial is a product of block sums.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{e, eval_heat, gaussian_phase, heat_size, ThetaInput, ThetaModel, ThetaValue};
use crate::error::Result;
use crate::polynomials::{heat_operator, CompiledPoly, MultiPoly};
use crate::sum::{ComplexSum, Neumaier};

const ZERO_ENTRY: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Block {
    pub lattice: Vec<usize>,
    pub ambient: Vec<usize>,
}

fn root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the bipartite graph lattice coordinate ↔ ambient
/// coordinate (edge where the map entry is nonzero). Returns a single block
/// unless the Gram matrix is block diagonal too and every ambient coordinate
/// is reached.
pub(crate) fn find_blocks(model: &ThetaModel) -> Vec<Block> {
    let n = model.rank();
    let m = model.ambient();
    let scale = model.map.amax().max(1.0);
    let mut parent: Vec<usize> = (0..n + m).collect();
    for i in 0..m {
        for j in 0..n {
            if model.map[(i, j)].abs() > ZERO_ENTRY * scale {
                let (a, b) = (root(&mut parent, j), root(&mut parent, n + i));
                parent[a] = b;
            }
        }
    }
    let mut comps: BTreeMap<usize, Block> = BTreeMap::new();
    for k in 0..n + m {
        let r = root(&mut parent, k);
        let blk = comps.entry(r).or_insert(Block { lattice: vec![], ambient: vec![] });
        if k < n {
            blk.lattice.push(k);
        } else {
            blk.ambient.push(k - n);
        }
    }
    let whole = vec![Block { lattice: (0..n).collect(), ambient: (0..m).collect() }];
    let blocks: Vec<Block> = comps.into_values().collect();
    if blocks.iter().any(|b| b.lattice.is_empty() || b.ambient.is_empty()) {
        return whole;
    }
    let mut owner = vec![0; n];
    for (k, b) in blocks.iter().enumerate() {
        for &j in &b.lattice {
            owner[j] = k;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if owner[i] != owner[j] && model.gram[(i, j)] != 0.0 {
                return whole;
            }
        }
    }
    blocks
}

fn sub_model(model: &ThetaModel, blk: &Block) -> Result<ThetaModel> {
    let gram = DMatrix::from_fn(blk.lattice.len(), blk.lattice.len(), |i, j| model.gram[(blk.lattice[i], blk.lattice[j])]);
    let map = DMatrix::from_fn(blk.ambient.len(), blk.lattice.len(), |i, j| model.map[(blk.ambient[i], blk.lattice[j])]);
    let p = blk.ambient.iter().filter(|&&i| i < model.p_amb).count();
    ThetaModel::new(gram, map, p, (p, blk.ambient.len() - p))
}

struct BlockSums {
    sums: Vec<Complex64>,
    abs: Vec<f64>,
    tails: Vec<f64>,
    radius: f64,
    points: u64,
}

pub(crate) fn theta_blocks(input: &ThetaInput, blocks: &[Block]) -> Result<ThetaValue> {
    let tau = input.tau;
    let y = tau.im;
    let nu = 1.0 / (4.0 * std::f64::consts::PI * y);
    // Ambient coordinates are sorted within each block and the positive ones
    // come first, so local indices keep the signature split.
    let terms: Vec<(Vec<Vec<u32>>, f64)> = input
        .poly
        .terms()
        .map(|(ex, &c)| (blocks.iter().map(|b| b.ambient.iter().map(|&i| ex[i]).collect()).collect(), c))
        .collect();
    let coef_l1: f64 = terms.iter().map(|t| t.1.abs()).sum();
    let target = input.truncation.tail_target / (blocks.len() as f64 * coef_l1.max(1.0));

    let mut per_block = Vec::with_capacity(blocks.len());
    let mut keys_per_block = Vec::with_capacity(blocks.len());
    for (k, blk) in blocks.iter().enumerate() {
        let keys: Vec<Vec<u32>> = {
            let mut v: Vec<Vec<u32>> = terms.iter().map(|t| t.0[k].clone()).collect();
            v.sort();
            v.dedup();
            v
        };
        let nv = blk.ambient.len();
        let heats: Vec<Vec<CompiledPoly>> =
            keys.iter().map(|ex| heat_operator(&MultiPoly::from_terms(nv, [(ex.clone(), 1.0)])).compile()).collect();
        let sizes: Vec<(f64, i32)> = heats.iter().map(|h| heat_size(h, y)).collect();
        let worst = sizes.iter().fold((0.0f64, 0), |a, s| (a.0.max(s.0), a.1.max(s.1)));
        let sm = sub_model(&input.model, blk)?;
        let radius =
            if input.truncation.radius > 0.0 { input.truncation.radius } else { sm.auto_radius(y, worst, target) };
        let alpha: Vec<f64> = blk.lattice.iter().map(|&j| input.alpha_shift[j]).collect();
        let beta: Vec<f64> = blk.lattice.iter().map(|&j| input.beta_shift[j]).collect();
        let nl = alpha.len();
        let a_pair: Vec<f64> = (0..nl).map(|i| (0..nl).map(|j| sm.gram[(i, j)] * alpha[j]).sum()).collect();
        let half_ba: f64 = 0.5 * beta.iter().zip(&a_pair).map(|(b, a)| b * a).sum::<f64>();
        let nk = keys.len();
        let p_amb = sm.p_amb;
        let parts = sm.fold_points(
            &beta,
            radius,
            || (vec![ComplexSum::new(); nk], vec![Neumaier::new(); nk], 0u64),
            |acc, c, x| {
                let (gauss, re_phase) = gaussian_phase(x, p_amb, tau);
                let lam_a: f64 = c.iter().zip(&a_pair).map(|(&ci, a)| ci as f64 * a).sum();
                let ph = e(re_phase - lam_a - half_ba) * gauss;
                for (i, h) in heats.iter().enumerate() {
                    let v = eval_heat(h, nu, x);
                    acc.0[i].add(ph * v);
                    acc.1[i].add(v.abs() * gauss);
                }
                acc.2 += 1;
            },
        )?;
        let mut sums = vec![ComplexSum::new(); nk];
        let mut abs = vec![Neumaier::new(); nk];
        let mut points = 0;
        for (s, a, p) in &parts {
            for i in 0..nk {
                sums[i].merge(&s[i]);
                abs[i].merge(&a[i]);
            }
            points += p;
        }
        per_block.push(BlockSums {
            sums: sums.iter().map(|s| s.value()).collect(),
            abs: abs.iter().map(|a| a.value()).collect(),
            tails: sizes.iter().map(|&s| sm.tail_bound(y, s, radius)).collect(),
            radius,
            points,
        });
        keys_per_block.push(keys);
    }

    let mut total = ComplexSum::new();
    let mut abs_total = Neumaier::new();
    let mut tail = Neumaier::new();
    for (parts, coef) in &terms {
        let mut prod = Complex64::new(*coef, 0.0);
        let mut abs_prod = 1.0;
        let mut bound_prod = 1.0;
        for (k, key) in parts.iter().enumerate() {
            let i = keys_per_block[k].binary_search(key).expect("key collected above");
            let bs = &per_block[k];
            prod *= bs.sums[i];
            abs_prod *= bs.abs[i];
            bound_prod *= bs.abs[i] + bs.tails[i];
        }
        total.add(prod);
        abs_total.add(coef.abs() * abs_prod);
        tail.add(coef.abs() * (bound_prod - abs_prod));
    }
    Ok(ThetaValue {
        value: total.value(),
        tail_estimate: tail.value(),
        abs_sum: abs_total.value(),
        radius: per_block.iter().map(|b| b.radius).fold(0.0, f64::max),
        points: per_block.iter().map(|b| b.points).sum(),
    })
}
