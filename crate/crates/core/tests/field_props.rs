use std::cmp::Ordering;

use asympt::field::{eval_poly, puiseux_roots, Series};
use asympt::scalar::{int, rat};
use asympt::{AsymptoticNumber, Rational};
use num_complex::Complex;
use num_traits::Zero;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn exponent() -> impl Strategy<Value = Rational> {
    (-3i64..=6, 1i64..=2).prop_map(|(n, d)| rat(n, d))
}

fn real(trunc: i64) -> impl Strategy<Value = Series<Rational>> {
    prop::collection::vec((exponent(), coeff()), 0..=4).prop_map(move |t| Series::new(t, int(trunc)))
}

fn complex(trunc: i64) -> impl Strategy<Value = AsymptoticNumber> {
    prop::collection::vec((exponent(), coeff(), coeff()), 0..=4)
        .prop_map(move |t| Series::new(t.into_iter().map(|(q, a, b)| (q, Complex::new(a, b))), int(trunc)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ring_axioms(a in complex(8), b in complex(8), c in complex(8)) {
        prop_assert!((&(&(&a + &b) + &c) - &(&a + &(&b + &c))).is_zero());
        prop_assert!((&(&(&a * &b) * &c) - &(&a * &(&b * &c))).is_zero());
        prop_assert!((&(&a * &b) - &(&b * &a)).is_zero());
        prop_assert!((&(&a * &(&b + &c)) - &(&(&a * &b) + &(&a * &c))).is_zero());
        prop_assert!((&a + &(-&a)).is_zero());
    }

    #[test]
    fn inverses(a in complex(8), b in complex(8)) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        let one = AsymptoticNumber::one(int(8));
        prop_assert!((&(&a * &a.inv().unwrap()) - &one).is_zero());
        let ab = (&a * &b).inv().unwrap();
        prop_assert!((&ab - &(&a.inv().unwrap() * &b.inv().unwrap())).is_zero());
        prop_assert!((&a.div(&a).unwrap() - &one).is_zero());
    }

    #[test]
    fn valuation_is_additive(a in complex(12), b in complex(12)) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        let (va, vb) = (a.valuation().finite().unwrap().clone(), b.valuation().finite().unwrap().clone());
        let p = &a * &b;
        let vp = &va + &vb;
        if &vp < p.trunc() {
            prop_assert_eq!(p.valuation().finite().cloned(), Some(vp));
        }
    }

    #[test]
    fn order_is_total_and_compatible(a in real(20), b in real(20), c in real(20)) {
        let ab = a.cmp_series(&b);
        prop_assert_eq!(ab, b.cmp_series(&a).reverse());
        prop_assert_eq!((&a + &c).cmp_series(&(&b + &c)), ab);
        if c.signum() == Ordering::Greater && ab != Ordering::Equal {
            let prod = (&(&a * &c) - &(&b * &c)).signum();
            prop_assume!(prod != Ordering::Equal);
            prop_assert_eq!(prod, ab);
        }
        if a.cmp_series(&b) == Ordering::Less && b.cmp_series(&c) == Ordering::Less {
            prop_assert_eq!(a.cmp_series(&c), Ordering::Less);
        }
    }

    #[test]
    fn evaluation_is_a_ring_map_on_polynomial_series(a in prop::collection::vec((0i64..=4, coeff()), 0..=3), b in prop::collection::vec((0i64..=4, coeff()), 0..=3), s in 2i64..=9) {
        let mk = |t: &Vec<(i64, Rational)>| Series::new(t.iter().map(|(q, c)| (int(*q), c.clone())), int(20));
        let (x, y) = (mk(&a), mk(&b));
        let e = rat(1, s);
        prop_assert_eq!((&x * &y).eval_at(&e).unwrap(), x.eval_at(&e).unwrap() * y.eval_at(&e).unwrap());
        prop_assert_eq!((&x + &y).eval_at(&e).unwrap(), x.eval_at(&e).unwrap() + y.eval_at(&e).unwrap());
    }

    #[test]
    fn square_roots_back_substitute(c0 in coeff(), c1 in coeff(), q in 0i64..=3) {
        prop_assume!(!c0.is_zero());
        let t = int(8);
        let one = Complex::new(Rational::from_integer(1.into()), Rational::zero());
        let rhs = &AsymptoticNumber::monomial(Complex::new(c0, Rational::zero()), int(q), t.clone())
            + &AsymptoticNumber::monomial(Complex::new(c1, Rational::zero()), int(q + 1), t.clone());
        let coeffs = vec![-rhs, AsymptoticNumber::zero(t.clone()), AsymptoticNumber::constant(one, t.clone())];
        let roots = puiseux_roots(&coeffs, &t).unwrap();
        prop_assert_eq!(roots.len(), 2);
        for r in roots {
            let v = eval_poly(&coeffs, &r.value);
            prop_assert!(v.is_zero(), "P(root) = {}", v);
        }
    }
}
