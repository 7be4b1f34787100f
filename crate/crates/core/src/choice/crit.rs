use crate::error::{Error, Result};
use crate::exact::{InfPolynomial, PolyExpr};

use super::perturb::build_g;

/// `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Determinant by Laplace expansion along the first row; fine for the small
/// sizes that occur here.
pub fn determinant(m: &[Vec<InfPolynomial>]) -> InfPolynomial {
    let k = m.len();
    match k {
        0 => panic!("empty matrix"),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = InfPolynomial::zero(m[0][0].ctx());
            for j in 0..k {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<InfPolynomial>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, p)| p.clone()).collect()).collect();
                let t = &m[0][j] * &determinant(&minor);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

/// All `size x size` minors of `m`, zero minors dropped.
pub fn minors(m: &[Vec<InfPolynomial>], size: usize) -> Vec<InfPolynomial> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if size == 0 || size > rows || size > cols {
        return Vec::new();
    }
    let mut out = Vec::new();
    for rs in subsets(rows, size) {
        for cs in subsets(cols, size) {
            let sub: Vec<Vec<InfPolynomial>> = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c].clone()).collect()).collect();
            let det = determinant(&sub);
            if !det.is_zero() {
                out.push(det);
            }
        }
    }
    out
}

/// Partial Jacobian of `(f_1, ..., f_s, g)` in `x_{k+1}, ..., x_n`: row per variable,
/// column per function.
pub fn partial_jacobian(fs: &[InfPolynomial], k: usize, d: u32) -> Result<Vec<Vec<InfPolynomial>>> {
    let ctx = fs.first().map(|f| f.ctx()).ok_or_else(|| Error::Invalid("empty family".into()))?;
    let g = build_g(ctx, d);
    (k + 1..=ctx.n).map(|i| fs.iter().chain(std::iter::once(&g)).map(|f| f.partial_derivative(i)).collect()).collect()
}

fn check_k(fs: &[InfPolynomial], k: usize) -> Result<()> {
    let n = fs.first().map_or(0, |f| f.ctx().n);
    if k < 1 || k > n {
        return Err(Error::Invalid(format!("k = {k} outside 1..={n}")));
    }
    Ok(())
}

/// `sum f_i^2 + sum m^2` over the `(k+1) x (k+1)` minors `m` of the partial Jacobian
/// of `(f, g)` in `x_{k+1..n}`, expanded.
pub fn crit_polynomial(fs: &[InfPolynomial], k: usize, d: u32) -> Result<InfPolynomial> {
    check_k(fs, k)?;
    let jac = partial_jacobian(fs, k, d)?;
    let mut out = InfPolynomial::zero(fs[0].ctx());
    for f in fs {
        out = &out + &f.square();
    }
    for m in minors(&jac, k + 1) {
        out = &out + &m.square();
    }
    Ok(out)
}

/// Structured `sumsq(f_1, ..., f_s, minors)` where the minors have size `rank + 1`.
/// `ctx` is used when the family is empty.
pub fn crit_expr(ctx: crate::exact::Ctx, fs: &[InfPolynomial], k: usize, rank: usize, d: u32) -> Result<PolyExpr> {
    if k < 1 || k > ctx.n {
        return Err(Error::Invalid(format!("k = {k} outside 1..={}", ctx.n)));
    }
    let g = build_g(ctx, d);
    let jac: Vec<Vec<InfPolynomial>> =
        (k + 1..=ctx.n).map(|i| fs.iter().chain(std::iter::once(&g)).map(|f| f.partial_derivative(i)).collect()).collect::<Result<_>>()?;
    let mut items: Vec<PolyExpr> = fs.iter().cloned().map(PolyExpr::from).collect();
    items.extend(minors(&jac, rank + 1).into_iter().map(PolyExpr::from));
    if items.is_empty() {
        return Ok(InfPolynomial::zero(ctx).into());
    }
    PolyExpr::sum_squares(items)
}
