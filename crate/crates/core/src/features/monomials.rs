use alloc::vec::Vec;

/// A monomial over linear-feature indices, stored as a sorted multiset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    vars: [usize; 3],
    degree: u8,
}

impl Monomial {
    pub fn quadratic(a: usize, b: usize) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Self { vars: [a, b, 0], degree: 2 }
    }

    pub fn cubic(a: usize, b: usize, c: usize) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        Self { vars: v, degree: 3 }
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars[..self.degree as usize]
    }
}

/// `C(n, k)` without overflow for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn quadratic_count(n_lin: usize) -> usize {
    binomial(n_lin + 1, 2)
}

pub fn cubic_count(n_lin: usize) -> usize {
    binomial(n_lin + 2, 3)
}

/// Nonlinear monomials (with repetition) of degree 2..=`degree` over
/// `n_lin` variables, in graded-lexicographic order: every quadratic
/// `(i ≤ j)` in lexicographic order, then every cubic `(i ≤ j ≤ k)`.
pub fn enumerate_monomials(n_lin: usize, degree: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    if degree >= 2 {
        out.reserve(quadratic_count(n_lin));
        for i in 0..n_lin {
            for j in i..n_lin {
                out.push(Monomial::quadratic(i, j));
            }
        }
    }
    if degree >= 3 {
        out.reserve(cubic_count(n_lin));
        for i in 0..n_lin {
            for j in i..n_lin {
                for k in j..n_lin {
                    out.push(Monomial::cubic(i, j, k));
                }
            }
        }
    }
    out
}

/// Position of the quadratic `(i, j)`, `i ≤ j`, inside the quadratic block.
pub(crate) fn quadratic_index(n_lin: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n_lin);
    // rows 0..i hold n, n-1, ..., n-i+1 entries
    i * n_lin - i * i.saturating_sub(1) / 2 + (j - i)
}
