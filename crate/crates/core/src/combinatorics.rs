//! Exact combinatorics over the rationals: harmonic numbers, Bell
//! polynomials, (restricted) Stirling numbers of the second kind and the
//! complete Bell map together with its inverse.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{MnError, Result};
use crate::exact_arith::{binomial, factorial, rat_big, rat_int, Rat};

/// `H_k = 1 + 1/2 + ... + 1/k`, defined for `k >= 1`.
pub fn harmonic(k: i64) -> Result<Rat> {
    if k < 1 {
        return Err(MnError::InvalidInput(format!("harmonic({k}) needs k >= 1")));
    }
    Ok((1..=k).fold(Rat::zero(), |acc, i| acc + Rat::new(BigInt::one(), BigInt::from(i))))
}

/// Falling factorial `(x)_k = x (x-1) ... (x-k+1)`.
pub fn falling_factorial(x: &Rat, k: u64) -> Rat {
    (0..k).fold(Rat::one(), |acc, i| acc * (x - rat_int(i as i64)))
}

/// Table `t[m][j] = B_{m,j}(x_1, ..)` for `0 <= j <= m <= n`.
///
/// Entries only read `x_i` for `i <= m - j + 1`, so a short `xs` is fine as
/// long as every entry that is requested has its inputs available.
fn bell_table(n: usize, xs: &[Rat]) -> Vec<Vec<Rat>> {
    let mut t = vec![vec![Rat::zero(); n + 1]; n + 1];
    t[0][0] = Rat::one();
    for m in 1..=n {
        for j in 1..=m {
            let mut acc = Rat::zero();
            for i in 1..=(m - j + 1) {
                if i > xs.len() || t[m - i][j - 1].is_zero() {
                    continue;
                }
                acc += rat_big(binomial((m - 1) as u64, (i - 1) as u64)) * &xs[i - 1] * &t[m - i][j - 1];
            }
            t[m][j] = acc;
        }
    }
    t
}

/// Partial (incomplete) Bell polynomial `B_{n,k}(x_1, ..., x_{n-k+1})`.
pub fn bell_incomplete(n: usize, k: usize, xs: &[Rat]) -> Result<Rat> {
    if k > n {
        if xs.is_empty() {
            return Ok(Rat::zero());
        }
        return Err(MnError::InvalidInput(format!(
            "B_{{{n},{k}}} takes no arguments, got {}",
            xs.len()
        )));
    }
    if xs.len() != n - k + 1 {
        return Err(MnError::InvalidInput(format!(
            "B_{{{n},{k}}} needs {} arguments, got {}",
            n - k + 1,
            xs.len()
        )));
    }
    Ok(bell_table(n, xs)[n][k].clone())
}

/// Coefficients `0..=deg` of `(sum_{i=1}^{r} x^i / i!)^k`.
fn restricted_egf_power(k: usize, r: usize, deg: usize) -> Vec<Rat> {
    let mut base = vec![Rat::zero(); deg + 1];
    for (i, slot) in base.iter_mut().enumerate().take(r.min(deg) + 1).skip(1) {
        *slot = Rat::new(BigInt::one(), factorial(i as u64));
    }
    let mut acc = vec![Rat::zero(); deg + 1];
    acc[0] = Rat::one();
    for _ in 0..k {
        let mut next = vec![Rat::zero(); deg + 1];
        for (a, ca) in acc.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in base.iter().enumerate().take(deg + 1 - a) {
                if !cb.is_zero() {
                    next[a + b] += ca * cb;
                }
            }
        }
        acc = next;
    }
    acc
}

/// Number of partitions of an `n`-set into `k` blocks, each of size at most `r`.
///
/// Read off the exponential generating function
/// `S_{<=r}(n,k) = n!/k! [x^n] (x + x^2/2! + ... + x^r/r!)^k`.
pub fn stirling2_restricted(n: usize, k: usize, r: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    if n == 0 {
        return BigInt::one();
    }
    let coeffs = restricted_egf_power(k, r, n);
    let v = &coeffs[n] * rat_big(factorial(n as u64)) / rat_big(factorial(k as u64));
    debug_assert!(v.is_integer());
    v.to_integer()
}

/// Stirling number of the second kind `S(n,k)`; zero when `n < k`.
pub fn stirling2(n: usize, k: usize) -> BigInt {
    stirling2_restricted(n, k, n.max(1))
}

/// Block-recurrence for restricted Stirling numbers, used as a cross-check:
/// the block holding the last element has some size `i <= r`.
pub fn stirling2_restricted_recurrence(n: usize, k: usize, r: usize) -> BigInt {
    let mut t = vec![vec![BigInt::zero(); k + 1]; n + 1];
    t[0][0] = BigInt::one();
    for m in 1..=n {
        for j in 1..=k.min(m) {
            let mut acc = BigInt::zero();
            for i in 1..=r.min(m) {
                acc += binomial((m - 1) as u64, (i - 1) as u64) * &t[m - i][j - 1];
            }
            t[m][j] = acc;
        }
    }
    t[n][k].clone()
}

/// Complete Bell map: `(x_1..x_N) -> (B_1..B_N)` with `B_0 = 1` and
/// `B_{n+1} = sum_{i=0}^{n} C(n,i) B_{n-i} x_{i+1}`.
pub fn bell_complete_seq(xs: &[Rat]) -> Result<Vec<Rat>> {
    if xs.is_empty() {
        return Err(MnError::InvalidInput("bell_complete_seq needs N >= 1".into()));
    }
    let mut b = vec![Rat::one()];
    for n in 0..xs.len() {
        let mut acc = Rat::zero();
        for i in 0..=n {
            acc += rat_big(binomial(n as u64, i as u64)) * &b[n - i] * &xs[i];
        }
        b.push(acc);
    }
    b.remove(0);
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseMethod {
    Recurrence,
    Riordan,
}

/// Inverse of the complete Bell map.
pub fn bell_inverse(ys: &[Rat], method: InverseMethod) -> Result<Vec<Rat>> {
    if ys.is_empty() {
        return Err(MnError::InvalidInput("bell_inverse needs N >= 1".into()));
    }
    Ok(match method {
        InverseMethod::Recurrence => {
            let mut xs: Vec<Rat> = Vec::with_capacity(ys.len());
            for n in 0..ys.len() {
                let mut acc = ys[n].clone();
                for i in 0..n {
                    acc -= rat_big(binomial(n as u64, i as u64)) * &ys[n - i - 1] * &xs[i];
                }
                xs.push(acc);
            }
            xs
        }
        InverseMethod::Riordan => {
            let t = bell_table(ys.len(), ys);
            (1..=ys.len())
                .map(|i| {
                    (1..=i).fold(Rat::zero(), |acc, k| {
                        let c = rat_big(factorial((k - 1) as u64));
                        let term = c * &t[i][k];
                        if k % 2 == 1 {
                            acc + term
                        } else {
                            acc - term
                        }
                    })
                })
                .collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::rat;

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat_int(x)).collect()
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(3).unwrap(), rat(11, 6));
        assert_eq!(harmonic(4).unwrap(), rat(25, 12));
        assert!(harmonic(0).is_err());
    }

    #[test]
    fn falling() {
        assert_eq!(falling_factorial(&rat_int(5), 3), rat_int(60));
        assert_eq!(falling_factorial(&rat_int(3), 5), rat_int(0));
    }

    #[test]
    fn partial_bell() {
        assert_eq!(bell_incomplete(4, 2, &ints(&[1, 1, 0])).unwrap(), rat_int(3));
        assert_eq!(bell_incomplete(3, 3, &ints(&[2])).unwrap(), rat_int(8));
        assert_eq!(bell_incomplete(6, 3, &ints(&[1, 1, 1, 1])).unwrap(), rat_int(90));
        assert!(bell_incomplete(4, 2, &ints(&[1, 1])).is_err());
    }

    #[test]
    fn stirling_values() {
        assert_eq!(stirling2(4, 2), BigInt::from(7));
        assert_eq!(stirling2(5, 3), BigInt::from(25));
        assert_eq!(stirling2(2, 3), BigInt::from(0));
        assert_eq!(stirling2_restricted(4, 2, 2), BigInt::from(3));
        assert_eq!(stirling2_restricted(4, 3, 2), BigInt::from(6));
        for p in [3usize, 5, 7] {
            assert_eq!(stirling2_restricted(p, 1, p - 1), BigInt::from(0));
        }
    }

    #[test]
    fn complete_bell() {
        assert_eq!(bell_complete_seq(&ints(&[1, 0])).unwrap(), ints(&[1, 1]));
        assert_eq!(bell_complete_seq(&ints(&[1, 1, 1])).unwrap(), ints(&[1, 2, 5]));
        assert!(bell_complete_seq(&[]).is_err());
    }

    #[test]
    fn inverse_examples() {
        for m in [InverseMethod::Recurrence, InverseMethod::Riordan] {
            let x = bell_inverse(&ints(&[3, 7]), m).unwrap();
            assert_eq!(x, ints(&[3, 7 - 9]));
            assert_eq!(bell_inverse(&ints(&[1, 1, 0, 0]), m).unwrap(), ints(&[1, 0, -1, 3]));
        }
    }
}
