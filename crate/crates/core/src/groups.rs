//! Finite cyclic groups, the homomorphisms `Z_K -> Z_N` that couple face
//! matter to the gauge field, their characters, and the closed-form
//! degeneracy calculus built on kernel and cokernel orders.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64 as C64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// The additive cyclic group `Z_order`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CyclicGroup {
    order: usize,
}

impl CyclicGroup {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::EmptyGroup);
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Canonical element for any integer representative.
    pub fn element(&self, value: i64) -> GroupElement {
        GroupElement {
            value: value.rem_euclid(self.order as i64) as usize,
            order: self.order,
        }
    }

    pub fn identity(&self) -> GroupElement {
        self.element(0)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |value| GroupElement {
            value,
            order: self.order,
        })
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        self.elements().map(|label| Character { label })
    }
}

/// An element of a cyclic group, stored as its representative in `[0, order)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    value: usize,
    order: usize,
}

impl GroupElement {
    pub fn value(&self) -> usize {
        self.value
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn inverse(&self) -> Self {
        -*self
    }

    pub fn is_identity(&self) -> bool {
        self.value == 0
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.order, other.order,
            "group elements from Z_{} and Z_{} cannot be combined",
            self.order, other.order
        );
    }
}

impl Add for GroupElement {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        self.check_same(&rhs);
        Self {
            value: (self.value + rhs.value) % self.order,
            order: self.order,
        }
    }
}

impl Neg for GroupElement {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            value: (self.order - self.value) % self.order,
            order: self.order,
        }
    }
}

impl Sub for GroupElement {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A group homomorphism `f: Z_K -> Z_N`, `f(x) = n x mod N`.
///
/// Every homomorphism between cyclic groups has this form, and `n` is valid
/// exactly when `N | n K`. The multiplier is kept in `[0, N)` so that each
/// homomorphism has a single representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Homomorphism {
    domain: CyclicGroup,
    codomain: CyclicGroup,
    multiplier: usize,
}

impl Homomorphism {
    /// `matter` is the domain order K, `gauge` the codomain order N.
    pub fn new(matter: usize, gauge: usize, multiplier: usize) -> Result<Self> {
        let domain = CyclicGroup::new(matter)?;
        let codomain = CyclicGroup::new(gauge)?;
        if multiplier >= gauge || !(multiplier * matter).is_multiple_of(gauge) {
            return Err(Error::NotAHomomorphism {
                domain: matter,
                codomain: gauge,
                multiplier,
            });
        }
        Ok(Self {
            domain,
            codomain,
            multiplier,
        })
    }

    pub fn trivial(matter: usize, gauge: usize) -> Result<Self> {
        Self::new(matter, gauge, 0)
    }

    pub fn domain(&self) -> CyclicGroup {
        self.domain
    }

    pub fn codomain(&self) -> CyclicGroup {
        self.codomain
    }

    pub fn multiplier(&self) -> usize {
        self.multiplier
    }

    pub fn is_trivial(&self) -> bool {
        self.multiplier == 0
    }

    pub fn apply(&self, x: GroupElement) -> GroupElement {
        assert_eq!(x.order(), self.domain.order, "argument outside the domain");
        self.apply_value(x.value())
    }

    pub fn apply_value(&self, x: usize) -> GroupElement {
        self.codomain
            .element((self.multiplier as i64) * (x as i64 % self.domain.order as i64))
    }

    /// Order of the image, the subgroup of `Z_N` generated by `n`.
    pub fn image_order(&self) -> usize {
        self.codomain.order / self.multiplier.gcd(&self.codomain.order)
    }

    pub fn kernel_order(&self) -> usize {
        self.domain.order / self.image_order()
    }

    /// Order of `Z_N / Im f`.
    pub fn cokernel_order(&self) -> usize {
        self.codomain.order / self.image_order()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel_order() == 1
    }

    pub fn is_surjective(&self) -> bool {
        self.cokernel_order() == 1
    }
}

impl fmt::Display for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Z_{} -> Z_{}, x -> {}x",
            self.domain.order, self.codomain.order, self.multiplier
        )
    }
}

/// All homomorphisms `Z_K -> Z_N`, ordered by multiplier. There are `gcd(N, K)`.
pub fn enumerate_homomorphisms(matter: usize, gauge: usize) -> Result<Vec<Homomorphism>> {
    CyclicGroup::new(matter)?;
    CyclicGroup::new(gauge)?;
    // n is valid iff N | nK iff (N / gcd(N, K)) | n.
    let step = gauge / gauge.gcd(&matter);
    (0..gauge)
        .step_by(step)
        .map(|n| Homomorphism::new(matter, gauge, n))
        .collect()
}

/// Total ground-state degeneracy `|ker f| * |coker f|^(2 genus)`.
pub fn gsd_formula(f: &Homomorphism, genus: u32) -> u64 {
    (f.kernel_order() as u64) * (f.cokernel_order() as u64).pow(2 * genus)
}

/// The three model classes distinguished by the coupling homomorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelClass {
    /// Trivial coupling: maximal algebraic degeneracy, matter invisible to the gauge sector.
    A,
    /// Isomorphic coupling: no algebraic degeneracy, every charge confined.
    B,
    /// Anything in between.
    C,
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelClass::A => "A",
            ModelClass::B => "B",
            ModelClass::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub class: ModelClass,
    pub kernel_order: usize,
    pub image_order: usize,
    pub cokernel_order: usize,
    /// Number of gauge charges `g` with `g * Im f = 0`; these stay deconfined.
    pub deconfined_charges: usize,
}

/// Classify the model `(N, K, n)` by the kernel and image of its coupling.
pub fn classify(gauge: usize, matter: usize, multiplier: usize) -> Result<Classification> {
    let f = Homomorphism::new(matter, gauge, multiplier)?;
    Ok(classify_homomorphism(&f))
}

pub fn classify_homomorphism(f: &Homomorphism) -> Classification {
    let class = if f.is_trivial() {
        ModelClass::A
    } else if f.is_injective() && f.is_surjective() {
        ModelClass::B
    } else {
        ModelClass::C
    };
    let gauge = f.codomain().order();
    let deconfined_charges = (0..gauge)
        .filter(|&g| (g * f.multiplier()).is_multiple_of(gauge))
        .count();
    Classification {
        class,
        kernel_order: f.kernel_order(),
        image_order: f.image_order(),
        cokernel_order: f.cokernel_order(),
        deconfined_charges,
    }
}

/// The character `chi_label(x) = exp(2 pi i label x / order)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    label: GroupElement,
}

impl Character {
    pub fn new(label: GroupElement) -> Self {
        Self { label }
    }

    pub fn label(&self) -> GroupElement {
        self.label
    }

    pub fn is_trivial(&self) -> bool {
        self.label.is_identity()
    }

    pub fn eval(&self, x: GroupElement) -> C64 {
        assert_eq!(
            x.order(),
            self.label.order(),
            "character of a different group"
        );
        root_of_unity(self.label.order(), self.label.value() * x.value())
    }

    /// Pointwise product of characters, `chi_a chi_b = chi_(a+b)`.
    pub fn product(&self, other: &Character) -> Character {
        Character::new(self.label + other.label)
    }

    pub fn conj(&self) -> Character {
        Character::new(-self.label)
    }
}

/// `exp(2 pi i k / order)`, reduced mod `order` first so large exponents stay exact.
pub fn root_of_unity(order: usize, k: usize) -> C64 {
    let k = k % order;
    if !(4 * k).is_multiple_of(order) {
        return C64::from_polar(1.0, TAU * k as f64 / order as f64);
    }
    // Exact values at the quarter turns keep sums of phases free of rounding.
    match 4 * k / order {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `f^(chi_gamma) = sum_x f(x) chi_gamma(x)` for every label `gamma`.
///
/// `values[x]` is `f` evaluated on the element with representative `x`.
pub fn fourier_transform(values: &[C64]) -> Vec<C64> {
    let order = values.len();
    (0..order)
        .map(|gamma| {
            values
                .iter()
                .enumerate()
                .map(|(x, v)| v * root_of_unity(order, gamma * x))
                .sum()
        })
        .collect()
}

/// Inverse of [`fourier_transform`]: `f(x) = (1/|S|) sum_gamma f^(chi_gamma) conj(chi_gamma(x))`.
pub fn inverse_fourier_transform(transform: &[C64]) -> Vec<C64> {
    let order = transform.len();
    let norm = 1.0 / order as f64;
    (0..order)
        .map(|x| {
            transform
                .iter()
                .enumerate()
                .map(|(gamma, v)| v * root_of_unity(order, gamma * x).conj())
                .sum::<C64>()
                * norm
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_homomorphisms(matter: usize, gauge: usize) -> Vec<usize> {
        // A map out of Z_K is fixed by the image n of the generator 1. It must
        // send the element 1 mod K to n (this fails for K = 1 unless n = 0) and
        // respect every sum, which we check exhaustively.
        (0..gauge)
            .filter(|&n| {
                let f = |x: usize| (n * x) % gauge;
                f(1 % matter) == n
                    && (0..matter)
                        .all(|x| (0..matter).all(|y| f((x + y) % matter) == (f(x) + f(y)) % gauge))
            })
            .collect()
    }

    fn brute_kernel(matter: usize, gauge: usize, n: usize) -> usize {
        (0..matter)
            .filter(|x| (n * x).is_multiple_of(gauge))
            .count()
    }

    fn brute_image(matter: usize, gauge: usize, n: usize) -> usize {
        let mut image: Vec<usize> = (0..matter).map(|x| (n * x) % gauge).collect();
        image.sort_unstable();
        image.dedup();
        image.len()
    }

    fn multipliers(matter: usize, gauge: usize) -> Vec<usize> {
        enumerate_homomorphisms(matter, gauge)
            .unwrap()
            .iter()
            .map(|f| f.multiplier())
            .collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(multipliers(2, 2), vec![0, 1]);
        assert_eq!(multipliers(3, 2), vec![0]);
        assert_eq!(multipliers(2, 4), vec![0, 2]);
        assert_eq!(brute_force_homomorphisms(2, 4), vec![0, 2]);
    }

    #[test]
    fn enumeration_matches_brute_force_up_to_eight() {
        for matter in 1..=8 {
            for gauge in 1..=8 {
                let found = multipliers(matter, gauge);
                assert_eq!(
                    found,
                    brute_force_homomorphisms(matter, gauge),
                    "K={matter} N={gauge}"
                );
                assert_eq!(found.len(), matter.gcd(&gauge));
            }
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Homomorphism::new(3, 2, 0).unwrap().kernel_order(), 3);
        assert_eq!(Homomorphism::new(2, 2, 1).unwrap().kernel_order(), 1);
        assert_eq!(Homomorphism::new(4, 4, 2).unwrap().kernel_order(), 2);
        assert_eq!(brute_kernel(4, 4, 2), 2);
    }

    #[test]
    fn image_and_cokernel_examples() {
        let f = Homomorphism::new(2, 2, 0).unwrap();
        assert_eq!((f.image_order(), f.cokernel_order()), (1, 2));
        let f = Homomorphism::new(2, 2, 1).unwrap();
        assert_eq!((f.image_order(), f.cokernel_order()), (2, 1));
        assert_eq!(brute_image(2, 2, 1), 2);
        let f = Homomorphism::new(4, 4, 2).unwrap();
        assert_eq!((f.image_order(), f.cokernel_order()), (2, 2));
        assert_eq!(brute_image(4, 4, 2), 2);
    }

    #[test]
    fn orders_match_brute_force_and_first_isomorphism_theorem() {
        for matter in 1..=12 {
            for gauge in 1..=12 {
                for f in enumerate_homomorphisms(matter, gauge).unwrap() {
                    let n = f.multiplier();
                    assert_eq!(f.kernel_order(), brute_kernel(matter, gauge, n));
                    assert_eq!(f.image_order(), brute_image(matter, gauge, n));
                    assert_eq!(f.kernel_order() * f.image_order(), matter);
                    assert_eq!(f.cokernel_order() * f.image_order(), gauge);
                }
            }
        }
    }

    #[test]
    fn invalid_multiplier_is_rejected() {
        let err = Homomorphism::new(3, 2, 1).unwrap_err();
        assert!(err.to_string().contains("not a homomorphism"));
        assert!(Homomorphism::new(2, 2, 2).is_err());
        assert!(classify(4, 2, 1).is_err());
        assert_eq!(CyclicGroup::new(0).unwrap_err(), Error::EmptyGroup);
    }

    #[test]
    fn homomorphism_laws() {
        for f in enumerate_homomorphisms(4, 8).unwrap() {
            let dom = f.domain();
            assert!(f.apply(dom.identity()).is_identity());
            for x in dom.elements() {
                assert_eq!(f.apply(-x), -f.apply(x));
                for y in dom.elements() {
                    assert_eq!(f.apply(x + y), f.apply(x) + f.apply(y));
                }
            }
        }
    }

    #[test]
    fn degeneracy_formula_examples() {
        assert_eq!(gsd_formula(&Homomorphism::trivial(1, 2).unwrap(), 1), 4);
        assert_eq!(gsd_formula(&Homomorphism::new(2, 2, 1).unwrap(), 1), 1);
        assert_eq!(gsd_formula(&Homomorphism::new(2, 2, 0).unwrap(), 0), 2);
        assert_eq!(gsd_formula(&Homomorphism::new(2, 2, 0).unwrap(), 1), 8);
        assert_eq!(gsd_formula(&Homomorphism::new(3, 2, 0).unwrap(), 1), 12);
    }

    #[test]
    fn genus_zero_reduces_to_kernel() {
        for matter in 1..=6 {
            for gauge in 1..=6 {
                for f in enumerate_homomorphisms(matter, gauge).unwrap() {
                    assert_eq!(gsd_formula(&f, 0), f.kernel_order() as u64);
                }
            }
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(5, 3, 0).unwrap().class, ModelClass::A);
        assert_eq!(classify(2, 2, 1).unwrap().class, ModelClass::B);
        let c = classify(4, 4, 2).unwrap();
        assert_eq!(c.class, ModelClass::C);
        assert_eq!((c.kernel_order, c.cokernel_order), (2, 2));
        assert_eq!(c.deconfined_charges, 2);
        assert_eq!(classify(4, 2, 2).unwrap().class, ModelClass::C);
        assert_eq!(classify(4, 4, 1).unwrap().class, ModelClass::B);
        assert_eq!(classify(4, 4, 3).unwrap().class, ModelClass::B);
    }

    #[test]
    fn fourier_examples() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let close = |a: &[C64], b: &[C64]| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12);
        assert!(close(&fourier_transform(&[one, one]), &[one * 2.0, zero]));
        assert!(close(&fourier_transform(&[one, zero]), &[one, one]));
        // omega^{f(lambda)} for f = id on Z_2
        let f = Homomorphism::new(2, 2, 1).unwrap();
        let values: Vec<C64> = (0..2)
            .map(|l| root_of_unity(2, f.apply_value(l).value()))
            .collect();
        assert!(close(&fourier_transform(&values), &[zero, one * 2.0]));
    }

    #[test]
    fn fourier_round_trip_on_z5() {
        let values: Vec<C64> = (0..5)
            .map(|x| C64::new(x as f64, (x * x) as f64 - 1.0))
            .collect();
        let back = inverse_fourier_transform(&fourier_transform(&values));
        for (a, b) in values.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn characters_are_orthonormal_and_multiplicative() {
        for order in 1..=7 {
            let group = CyclicGroup::new(order).unwrap();
            for a in group.characters() {
                for b in group.characters() {
                    let inner: C64 = group
                        .elements()
                        .map(|x| a.eval(x) * b.eval(x).conj())
                        .sum::<C64>()
                        / order as f64;
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((inner - expected).norm() < 1e-12);
                }
                for x in group.elements() {
                    assert!((a.eval(x).norm() - 1.0).abs() < 1e-12);
                    for y in group.elements() {
                        assert!((a.eval(x + y) - a.eval(x) * a.eval(y)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn roots_of_unity_are_exact_on_quarter_turns() {
        assert_eq!(root_of_unity(4, 1), C64::new(0.0, 1.0));
        assert_eq!(root_of_unity(2, 1), C64::new(-1.0, 0.0));
        assert_eq!(root_of_unity(4, 7), C64::new(0.0, -1.0));
        assert!((root_of_unity(3, 1) - C64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }
}
