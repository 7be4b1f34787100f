use defchoice::choice::{approximate_choice_basic, crit_polynomial};
use defchoice::evalhaus::{hausdorff_estimate, sample_cloud, Points, SampleBox};
use defchoice::exact::rational::{int, rat};
use defchoice::exact::{parse_poly, Ctx, InfPolynomial, PolyExpr, Rational, Sign};
use defchoice::formula::{formula_from_json, formula_to_json, BasicClosedSet, Formula, Node, Rel};
use defchoice::rng::stream;
use defchoice::verify::{box_dimension_default, count_components};
use defchoice::PipelineConfig;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

type Terms = Vec<(Vec<u32>, i64, i64)>;

fn build(ctx: Ctx, terms: &Terms) -> InfPolynomial {
    InfPolynomial::from_terms(ctx, terms.iter().map(|(e, a, b)| (e.clone(), rat(*a, *b)))).unwrap()
}

fn terms(width: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = Terms> {
    prop::collection::vec((prop::collection::vec(0..=max_exp, width), -9i64..=9, 1i64..=5), 1..=max_terms)
}

/// Polynomials in the infinitesimals only (`n = 1`, no `x1`).
fn zeta_terms(m: usize) -> impl Strategy<Value = Terms> {
    terms(m, 3, 4).prop_map(|ts| {
        ts.into_iter()
            .map(|(e, a, b)| {
                let mut full = vec![0];
                full.extend(e);
                (full, a, b)
            })
            .collect()
    })
}

fn random_poly(rng: &mut impl Rng, ctx: Ctx, max_deg: u32) -> InfPolynomial {
    let ts: Terms = (0..rng.gen_range(1..=3))
        .map(|_| {
            let mut e = vec![0; ctx.width()];
            for _ in 0..rng.gen_range(0..=max_deg) {
                let v = rng.gen_range(0..ctx.width());
                e[v] += 1;
            }
            (e, rng.gen_range(-5..=5), rng.gen_range(1..=3))
        })
        .collect();
    build(ctx, &ts)
}

fn random_node(rng: &mut impl Rng, ctx: Ctx, depth: u32, rels: &[Rel]) -> Node {
    if depth == 0 || rng.gen_bool(0.3) {
        let expr: PolyExpr = match rng.gen_range(0..4) {
            0 => PolyExpr::sum_squares(vec![random_poly(rng, ctx, 2).into(), random_poly(rng, ctx, 1).into()]).unwrap(),
            1 => PolyExpr::product(vec![random_poly(rng, ctx, 1).into(), random_poly(rng, ctx, 2).into()]).unwrap(),
            _ => random_poly(rng, ctx, 2).into(),
        };
        return Node::atom(expr, rels[rng.gen_range(0..rels.len())]);
    }
    let items = (0..rng.gen_range(1..=3)).map(|_| random_node(rng, ctx, depth - 1, rels)).collect();
    if rng.gen_bool(0.5) {
        Node::And(items)
    } else {
        Node::Or(items)
    }
}

const ALL_RELS: [Rel; 6] = [Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge];
const OPEN_RELS: [Rel; 5] = [Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge];

fn small_rational() -> impl Strategy<Value = Rational> {
    (-8i64..=8, prop::sample::select(vec![1i64, 2, 4])).prop_map(|(a, b)| rat(a, b))
}

fn cloud(dim: usize, max: usize) -> impl Strategy<Value = Points> {
    prop::collection::vec(-1.0f64..1.0, dim..=dim * max).prop_map(move |mut v| {
        v.truncate(v.len() / dim * dim);
        Points::new(dim, v, 0.01)
    })
}

// ---- independent oracle for the critical polynomial ----------------------

fn eval_terms(ts: &Terms, x: &[Rational]) -> Rational {
    ts.iter()
        .map(|(e, a, b)| e.iter().zip(x).fold(rat(*a, *b), |acc, (&k, xi)| acc * defchoice::exact::rational::pow(xi, k)))
        .sum()
}

fn deriv_terms(ts: &Terms, x: &[Rational], i: usize) -> Rational {
    ts.iter()
        .filter(|(e, _, _)| e[i] > 0)
        .map(|(e, a, b)| {
            let mut rest = e.clone();
            rest[i] -= 1;
            eval_terms(&vec![(rest, *a, *b)], x) * int(e[i] as i64)
        })
        .sum()
}

/// Determinant by Gaussian elimination over the rationals.
fn det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut out = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            out = -out;
        }
        out *= m[c][c].clone();
        for r in c + 1..n {
            let f = m[r][c].clone() / m[c][c].clone();
            for k in c..n {
                let v = m[c][k].clone() * f.clone();
                m[r][k] -= v;
            }
        }
    }
    out
}

fn choose(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k - 1..n).flat_map(|last| choose(last, k - 1).into_iter().map(move |mut s| { s.push(last); s })).collect()
}

proptest! {
    #[test]
    fn ring_laws(a in terms(3, 2, 3), b in terms(3, 2, 3), c in terms(3, 2, 3)) {
        let ctx = Ctx::new(2, 1);
        let (a, b, c) = (build(ctx, &a), build(ctx, &b), build(ctx, &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn inf_sign_is_multiplicative(p in zeta_terms(3), q in zeta_terms(3)) {
        let ctx = Ctx::new(1, 3);
        let (p, q) = (build(ctx, &p), build(ctx, &q));
        let prod = (&p * &q).inf_sign().unwrap();
        prop_assert_eq!(prod.to_i8(), p.inf_sign().unwrap().to_i8() * q.inf_sign().unwrap().to_i8());
        prop_assert_eq!((-&p).inf_sign().unwrap().to_i8(), -p.inf_sign().unwrap().to_i8());
    }

    #[test]
    fn limits_preserve_order(p in zeta_terms(2), q in zeta_terms(2)) {
        let ctx = Ctx::new(1, 2);
        let (p, q) = (build(ctx, &p), build(ctx, &q));
        let lim = |f: &InfPolynomial| f.limit_hom(2).unwrap().limit_hom(1).unwrap().constant_term();
        if (&p - &q).inf_sign().unwrap() != Sign::Neg {
            prop_assert!(lim(&p) >= lim(&q));
        }
    }

    #[test]
    fn sign_dnf_has_the_same_members(seed in any::<u64>(), x in small_rational(), y in small_rational()) {
        let mut rng = stream(seed, "props/dnf");
        let ctx = Ctx::new(2, 0);
        let f = Formula::new(ctx, random_node(&mut rng, ctx, 3, &ALL_RELS)).unwrap();
        let pt = [x, y];
        prop_assert_eq!(f.membership(&pt).unwrap(), f.to_sign_dnf().membership(&pt).unwrap());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), n in 1usize..=3, m in 0usize..=3) {
        let mut rng = stream(seed, "props/json");
        let ctx = Ctx::new(n, m);
        let f = Formula::new(ctx, random_node(&mut rng, ctx, 3, &ALL_RELS)).unwrap();
        prop_assert_eq!(formula_from_json(&formula_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn hausdorff_is_symmetric(a in cloud(2, 40), b in cloud(2, 40)) {
        let ab = hausdorff_estimate(&a, &b).unwrap().value;
        let ba = hausdorff_estimate(&b, &a).unwrap().value;
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(hausdorff_estimate(&a, &a).unwrap().value, 0.0);
    }

    #[test]
    fn components_shrink_as_radius_grows(a in cloud(2, 80), r in 0.03f64..0.3, dr in 0.0f64..0.5) {
        let near = count_components(&a, r).unwrap();
        let far = count_components(&a, r + dr).unwrap();
        prop_assert!(far <= near && far >= 1);
    }

    #[test]
    fn crit_polynomial_vanishes_exactly_on_critical_points(
        fs in prop::collection::vec(terms(3, 2, 3), 1..=2),
        x in prop::collection::vec(prop::sample::select(vec![rat(-1, 1), rat(-1, 2), Rational::zero(), rat(1, 2), rat(1, 1)]), 3),
        shift in prop::collection::vec(any::<bool>(), 2),
    ) {
        let (n, k, d) = (3usize, 1usize, 1u32);
        let ctx = Ctx::new(n, 0);
        // move most families onto the point so both outcomes occur
        let fs: Vec<Terms> = fs
            .into_iter()
            .zip(&shift)
            .map(|(mut t, &s)| {
                if s {
                    let v = eval_terms(&t, &x);
                    let (num, den) = (v.numer().clone(), v.denom().clone());
                    let (num, den): (i64, i64) = (num.try_into().unwrap(), den.try_into().unwrap());
                    t.push((vec![0; n], -num, den));
                }
                t
            })
            .collect();
        let polys: Vec<InfPolynomial> = fs.iter().map(|t| build(ctx, t)).collect();
        let got = crit_polynomial(&polys, k, d).unwrap().eval(&x).unwrap().is_zero();

        // rows x_{k+1..n}, columns f_1..f_s and g = 1 + sum j x_j^(2d+2)
        let jac: Vec<Vec<Rational>> = (k..n)
            .map(|i| {
                let mut row: Vec<Rational> = fs.iter().map(|t| deriv_terms(t, &x, i)).collect();
                row.push(int(((i + 1) as i64) * (2 * d as i64 + 2)) * defchoice::exact::rational::pow(&x[i], 2 * d + 1));
                row
            })
            .collect();
        let size = k + 1;
        let cols = fs.len() + 1;
        let minors_vanish = size > jac.len() || size > cols || choose(jac.len(), size).iter().all(|rs| {
            choose(cols, size).iter().all(|cs| det(rs.iter().map(|&r| cs.iter().map(|&c| jac[r][c].clone()).collect()).collect()).is_zero())
        });
        let want = fs.iter().all(|t| eval_terms(t, &x).is_zero()) && minors_vanish;
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_points_satisfy_inequality_formulas(seed in any::<u64>()) {
        let mut rng = stream(seed, "props/sample");
        let ctx = Ctx::new(2, 0);
        let f = Formula::new(ctx, random_node(&mut rng, ctx, 2, &OPEN_RELS)).unwrap();
        let c = sample_cloud(&f, &SampleBox::cube(2, &rat(3, 2)).unwrap(), &rat(1, 8)).unwrap();
        for i in 0..c.len() {
            prop_assert!(f.membership(&c.point_exact(i)).unwrap(), "{} holds no point {:?}", f, c.point_exact(i));
        }
    }

    #[test]
    fn projection_does_not_raise_dimension(seed in any::<u64>(), coord in 0usize..2) {
        let mut rng = stream(seed, "props/project");
        let ctx = Ctx::new(2, 0);
        let f = Formula::new(ctx, random_node(&mut rng, ctx, 2, &ALL_RELS)).unwrap();
        let c = sample_cloud(&f, &SampleBox::cube(2, &int(1)).unwrap(), &rat(1, 64)).unwrap();
        prop_assume!(c.len() >= 50);
        let pts = c.to_points();
        let full = box_dimension_default(&pts);
        let proj = box_dimension_default(&pts.project(&[coord]));
        prop_assert!(proj <= full + 0.3, "projection {proj} of a cloud of dimension {full}");
    }
}

/// Lattice point, segment or square of side `cells * h` starting at the origin.
fn shape(kind: usize, cells: usize, h: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
    match kind {
        0 => vec![vec![0.0]],
        1 => axis.iter().map(|&a| vec![a]).collect(),
        _ => axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn product_dimension_adds(ka in 0usize..=2, kb in 0usize..=1, ca in 64usize..=96, cb in 64usize..=96) {
        let h = 1.0 / 64.0;
        let (a, b) = (shape(ka, ca, h), shape(kb, cb, h));
        let dim = a[0].len() + b[0].len();
        let mut data = Vec::with_capacity(a.len() * b.len() * dim);
        for p in &a {
            for q in &b {
                data.extend(p);
                data.extend(q);
            }
        }
        let got = box_dimension_default(&Points::new(dim, data, h));
        let want = (ka + kb) as f64;
        prop_assert!((got - want).abs() <= 0.3, "{ka} x {kb}: measured {got}");
    }
}

#[test]
fn pipeline_is_deterministic() {
    let ctx = Ctx::new(2, 0);
    let s = BasicClosedSet::from_polys(ctx, vec![parse_poly("x1^2 + x2^2 - 1", ctx).unwrap()], vec![]).unwrap();
    let cfg = PipelineConfig::default();
    let run = || approximate_choice_basic(&s, 1, 0.1, &int(2), &cfg).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.formula, b.formula);
    assert_eq!(a.output.to_csv(12), b.output.to_csv(12));
    assert_eq!(a.projection.to_csv(12), b.projection.to_csv(12));
    assert_eq!(serde_json::to_string(&a.metrics).unwrap(), serde_json::to_string(&b.metrics).unwrap());
    assert!(a.output.len() > 0 && !a.formula.atoms().is_empty());
}
