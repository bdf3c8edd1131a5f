//! Sugawara operator T[−1], biorthogonal bases of the irreducible node
//! modules, and JSON export of module data.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::engine::{Gen, Structure};
use super::module::{Coords, GradedModule, NodePairing};
use crate::error::{Error, Result};
use crate::exactnum::cyc::{rat_int, Rat};
use crate::linalg::Dense;

/// Dual basis of the rational basis under the trace form: X^α = Σ_β D[α][β] X_β.
pub fn trace_dual(st: &Structure) -> Result<Vec<Vec<(usize, Rat)>>> {
    let d = st.eb.len();
    let mut t = Dense::zeros(d, d, &Rat::zero());
    for a in 0..d {
        for b in 0..d {
            t.set(a, b, st.trace[a][b].clone());
        }
    }
    let inv = t.inverse()?;
    Ok((0..d)
        .map(|a| (0..d).filter(|&b| !inv.get(b, a).is_zero()).map(|b| (b, inv.get(b, a).clone())).collect())
        .collect())
}

fn accumulate(acc: &mut BTreeMap<usize, Rat>, x: &Coords, c: &Rat) {
    for (i, v) in x {
        let e = acc.entry(*i).or_insert_with(Rat::zero);
        *e += v * c;
        if e.is_zero() {
            acc.remove(i);
        }
    }
}

/// T[−1] = (k + N)^{-1} Σ_α Σ_{m ≥ 0} X^α[−1−m] X_α[m] on a module at a
/// marked point; maps degree d to d + 1.
pub fn sugawara_lminus1(m: &mut GradedModule, d: usize, v: &Coords) -> Result<Coords> {
    let n = m.n();
    let kappa = &m.engine.level + rat_int(n as i64);
    if kappa.is_zero() {
        return Err(Error::InvalidInput("the critical level k = −N is excluded".into()));
    }
    if d + 1 > m.dmax {
        return Err(Error::Truncation(format!("T[−1] from degree {d} leaves the truncation {}", m.dmax)));
    }
    let dual = trace_dual(&m.engine.st)?;
    let mut acc = BTreeMap::new();
    for (alpha, dual_alpha) in dual.iter().enumerate() {
        for mode in 0..=d as i64 {
            let x = m.act_vec(Gen { mode, alpha }, d, v)?;
            if x.is_empty() {
                continue;
            }
            let dd = d - mode as usize;
            for (beta, c) in dual_alpha {
                let y = m.act_vec(Gen { mode: -1 - mode, alpha: *beta }, dd, &x)?;
                accumulate(&mut acc, &y, c);
            }
        }
    }
    let inv = Rat::one() / kappa;
    Ok(acc.into_iter().map(|(i, c)| (i, c * &inv)).collect())
}

/// Biorthogonal bases of L^(0)(d) × L^(∞)(d): e_i is the i-th basis vector
/// of L^(0)(d); e^i is returned in L^(∞)(d) coordinates.
pub fn dual_bases(p: &NodePairing, d: usize) -> Result<(Vec<Coords>, Vec<Coords>)> {
    let inv = p
        .quotient
        .dual
        .get(d)
        .ok_or_else(|| Error::Truncation(format!("degree {d} exceeds the pairing truncation")))?;
    let k = p.quotient.left[d].reps.len();
    let e: Vec<Coords> = (0..k).map(|i| vec![(i, Rat::one())]).collect();
    let ed: Vec<Coords> = (0..k)
        .map(|i| (0..k).filter(|&c| !inv.get(c, i).is_zero()).map(|c| (c, inv.get(c, i).clone())).collect())
        .collect();
    Ok((e, ed))
}

fn rat_str(r: &Rat) -> String {
    r.to_string()
}

/// Basis labels, dimensions and action tables of E_α[mode] for |mode| ≤ `modes`.
pub fn module_json(m: &mut GradedModule, modes: i64) -> Result<Value> {
    let mut degrees = Vec::new();
    for d in 0..=m.dmax {
        let labels: Vec<String> = (0..m.dim(d)).map(|i| m.label(d, i)).collect();
        degrees.push(json!({"degree": d, "dim": m.dim(d), "basis": labels}));
    }
    let mut tables = Vec::new();
    for alpha in 0..m.engine.st.eb.len() {
        for mode in -modes..=modes {
            if !m.engine.allowed(alpha, mode) {
                continue;
            }
            for d in 0..=m.dmax {
                let t = d as i64 - mode;
                if t < 0 || t as usize > m.dmax {
                    continue;
                }
                let mut entries = Vec::new();
                for i in 0..m.dim(d) {
                    for (j, c) in m.act(Gen { mode, alpha }, d, i)? {
                        entries.push(json!([i, j, rat_str(&c)]));
                    }
                }
                let (p, q) = m.engine.st.eb.labels[alpha];
                tables.push(json!({
                    "generator": [p + 1, q + 1], "mode": mode, "from_degree": d, "entries": entries
                }));
            }
        }
    }
    Ok(json!({
        "kind": format!("{:?}", m.kind),
        "n": m.n(),
        "level": rat_str(&m.engine.level),
        "dmax": m.dmax,
        "degrees": degrees,
        "actions": tables,
    }))
}

/// Gram matrices between the PBW bases of the two node Verma modules.
pub fn gram_json(p: &NodePairing) -> Value {
    let mut out = Vec::new();
    for d in 0..p.gram.degrees.len() {
        let r = p.zero.full_dim(d);
        let c = p.inf.full_dim(d);
        let g = p.gram.dense(d, r, c);
        let rows: Vec<Vec<String>> = (0..r).map(|i| (0..c).map(|j| rat_str(g.get(i, j))).collect()).collect();
        out.push(json!({"degree": d, "rows": r, "cols": c, "gram": rows,
            "irreducible_dim": p.quotient.left[d].reps.len()}));
    }
    Value::Array(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twistalg::{weight_tilde, AffineWeight, FinRep};
    use rand::{Rng, SeedableRng};

    #[test]
    fn trace_dual_is_dual() {
        let st = Structure::new(3);
        let dual = trace_dual(&st).unwrap();
        for a in 0..st.eb.len() {
            for b in 0..st.eb.len() {
                let s = dual[a].iter().fold(Rat::zero(), |acc, (g, c)| acc + c * &st.trace[b][*g]);
                assert_eq!(s, if a == b { Rat::one() } else { Rat::zero() });
            }
        }
    }

    #[test]
    fn sugawara_commutator() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (n, rep) in [(2u32, FinRep::Fund), (2, FinRep::Trivial), (3, FinRep::Fund)] {
            let dmax = if n == 2 { 4 } else { 3 };
            let mut m = GradedModule::weyl(n, rep, &rat_int(1), dmax).unwrap();
            let nal = m.engine.st.eb.len();
            for _ in 0..10 {
                let d = rng.gen_range(0..=1usize);
                let i = rng.gen_range(0..m.dim(d));
                let alpha = rng.gen_range(0..nal);
                let mode: i64 = rng.gen_range(-1..=2);
                let v: Coords = vec![(i, Rat::one())];
                let g = Gen { mode, alpha };
                let dx = d as i64 - mode;
                if dx < 0 {
                    continue;
                }
                let dx = dx as usize;
                let tv = sugawara_lminus1(&mut m, d, &v).unwrap();
                let xtv = m.act_vec(g, d + 1, &tv).unwrap();
                let xv = m.act_vec(g, d, &v).unwrap();
                let txv = sugawara_lminus1(&mut m, dx, &xv).unwrap();
                let mut lhs = BTreeMap::new();
                accumulate(&mut lhs, &txv, &Rat::one());
                accumulate(&mut lhs, &xtv, &-Rat::one());
                let rhs = m.act_vec(Gen { mode: mode - 1, alpha }, d, &v).unwrap();
                let mut want = BTreeMap::new();
                accumulate(&mut want, &rhs, &rat_int(-mode));
                assert_eq!(lhs, want, "N={n} {g:?} d={d}");
            }
        }
        let mut crit = GradedModule::weyl(2, FinRep::Fund, &rat_int(-2), 2).unwrap();
        assert!(sugawara_lminus1(&mut crit, 0, &vec![(0, Rat::one())]).is_err());
    }

    #[test]
    fn degree_zero_image_uses_minus_one_modes() {
        let mut m = GradedModule::weyl(2, FinRep::Fund, &rat_int(1), 1).unwrap();
        let tv = sugawara_lminus1(&mut m, 0, &vec![(0, Rat::one())]).unwrap();
        assert!(!tv.is_empty());
        for (i, _) in tv {
            assert!(m.label(1, i).contains("[-1]"));
        }
    }

    #[test]
    fn biorthogonal_at_level_one() {
        let k = rat_int(1);
        let lam = AffineWeight::from_h_values(k.clone(), &[rat_int(1)]);
        let (lt, _) = weight_tilde(&lam, &k).unwrap();
        let p = NodePairing::new(2, &lt, 3).unwrap();
        for d in 0..=3 {
            let (e, ed) = dual_bases(&p, d).unwrap();
            let g = &p.quotient.gram[d];
            for (i, ei) in e.iter().enumerate() {
                for (j, ej) in ed.iter().enumerate() {
                    let mut s = Rat::zero();
                    for (a, x) in ei {
                        for (b, y) in ej {
                            s += g.get(*a, *b) * x * y;
                        }
                    }
                    assert_eq!(s, if i == j { Rat::one() } else { Rat::zero() });
                }
            }
        }
    }
}
