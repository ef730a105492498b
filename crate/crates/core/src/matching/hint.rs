use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::field::{FieldElement, PrimeField, SolveError};

use super::MatchError;

/// Public linear constraints `[I | R] · h_opt = B` over the optional hashes.
///
/// Only `R` (γ×β, row-major, nonzero 32-bit entries) and `B` are stored; the
/// identity block is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HintMatrix {
    gamma: usize,
    beta: usize,
    r: Vec<u32>,
    b: Vec<FieldElement>,
}

impl HintMatrix {
    pub fn from_parts(
        gamma: usize,
        beta: usize,
        r: Vec<u32>,
        b: Vec<FieldElement>,
    ) -> Result<Self, MatchError> {
        if gamma == 0 || r.len() != gamma * beta || b.len() != gamma || r.contains(&0) {
            return Err(MatchError::HintShape);
        }
        Ok(HintMatrix { gamma, beta, r, b })
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn r(&self) -> &[u32] {
        &self.r
    }

    pub fn b(&self) -> &[FieldElement] {
        &self.b
    }

    /// Coefficient of optional column `col` in row `row` of `[I | R]`.
    fn coef(&self, row: usize, col: usize) -> u32 {
        if col < self.gamma {
            u32::from(row == col)
        } else {
            self.r[row * self.beta + col - self.gamma]
        }
    }
}

/// Draws `R` uniformly from `[1, 2^32)` and computes `B = [I | R] · optional`.
pub fn build_hint_matrix<R: RngCore + ?Sized>(
    field: &PrimeField,
    optional: &[FieldElement],
    gamma: usize,
    rng: &mut R,
) -> HintMatrix {
    assert!(
        gamma >= 1 && gamma <= optional.len(),
        "hint matrix needs 1 <= gamma <= optional count"
    );
    let beta = optional.len() - gamma;
    let r: Vec<u32> = (0..gamma * beta)
        .map(|_| rng.random_range(1..=u32::MAX))
        .collect();
    build_hint_matrix_with(field, optional, gamma, r)
}

/// Same as [`build_hint_matrix`] with caller-chosen `R`.
pub fn build_hint_matrix_with(
    field: &PrimeField,
    optional: &[FieldElement],
    gamma: usize,
    r: Vec<u32>,
) -> HintMatrix {
    let beta = optional.len() - gamma;
    assert_eq!(r.len(), gamma * beta);
    let b = (0..gamma)
        .map(|row| {
            let mut acc = optional[row].clone();
            for j in 0..beta {
                acc = field.add(
                    &acc,
                    &field.mul_u32(&optional[gamma + j], r[row * beta + j]),
                );
            }
            acc
        })
        .collect();
    HintMatrix { gamma, beta, r, b }
}

/// Recovers the unknown optional hashes given the known ones.
///
/// `knowns` holds one entry per optional position (`γ + β`). With zero
/// unknowns the knowns are returned as-is. When `residues` is given as
/// `(per-position residues, p)`, every recovered value must reduce to its
/// position's residue. Recovered values must fit in 256 bits.
pub fn solve_hint(
    field: &PrimeField,
    hint: &HintMatrix,
    knowns: &[Option<FieldElement>],
    residues: Option<(&[u32], u32)>,
) -> Result<Vec<FieldElement>, MatchError> {
    let cols = hint.gamma + hint.beta;
    if knowns.len() != cols {
        return Err(MatchError::HintShape);
    }
    let unknown: Vec<usize> = (0..cols).filter(|&c| knowns[c].is_none()).collect();
    if unknown.is_empty() {
        return Ok(knowns.iter().flatten().cloned().collect());
    }
    if unknown.len() > hint.gamma {
        return Err(MatchError::SingularSystem);
    }

    let rows = hint.gamma;
    let mut rhs = Vec::with_capacity(rows);
    let mut a = Vec::with_capacity(rows * unknown.len());
    for row in 0..rows {
        let mut v = hint.b[row].clone();
        for (col, known) in knowns.iter().enumerate() {
            if let Some(h) = known {
                let c = hint.coef(row, col);
                if c != 0 {
                    v = field.sub(&v, &field.mul_u32(h, c));
                }
            }
        }
        rhs.push(v);
        a.extend(unknown.iter().map(|&col| field.elem(hint.coef(row, col))));
    }
    let solved = field
        .solve(rows, unknown.len(), a, rhs)
        .map_err(|e| match e {
            SolveError::Rank => MatchError::SingularSystem,
            SolveError::Inconsistent => MatchError::Inconsistent,
        })?;

    let mut out: Vec<FieldElement> = Vec::with_capacity(cols);
    let mut it = solved.into_iter();
    for (col, known) in knowns.iter().enumerate() {
        match known {
            Some(h) => out.push(h.clone()),
            None => {
                let v = it.next().expect("one solution per unknown");
                let d = v.to_digest().ok_or(MatchError::ValueOutOfRange)?;
                if let Some((res, p)) = residues {
                    if d.rem_u32(p) != res[col] {
                        return Err(MatchError::ResidueMismatch);
                    }
                }
                out.push(v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digest::Digest;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> PrimeField {
        PrimeField::from_u64_modulus(101)
    }

    #[test]
    fn toy_b_by_substitution() {
        let f = toy();
        let h: Vec<_> = [9u32, 5, 6].iter().map(|&v| f.elem(v)).collect();
        let hm = build_hint_matrix_with(&f, &h, 1, vec![7, 3]);
        // 9 + 7*5 + 3*6 = 62
        assert_eq!(hm.b(), &[f.elem(62u32)]);
    }

    #[test]
    fn toy_solve_identity_column() {
        let f = toy();
        let hm = HintMatrix::from_parts(1, 2, vec![7, 3], vec![f.elem(62u32)]).unwrap();
        let got = solve_hint(
            &f,
            &hm,
            &[None, Some(f.elem(5u32)), Some(f.elem(6u32))],
            None,
        )
        .unwrap();
        // 62 - 35 - 18 = 9
        assert_eq!(got, vec![f.elem(9u32), f.elem(5u32), f.elem(6u32)]);
    }

    #[test]
    fn toy_solve_r_column() {
        let f = toy();
        let hm = HintMatrix::from_parts(1, 2, vec![7, 3], vec![f.elem(62u32)]).unwrap();
        let got = solve_hint(
            &f,
            &hm,
            &[Some(f.elem(9u32)), None, Some(f.elem(6u32))],
            None,
        )
        .unwrap();
        // 7 * h = 35, 7^-1 = 29 mod 101
        assert_eq!(got[1], f.elem(5u32));
        assert_eq!(f.mul(&f.elem(35u32), &f.elem(29u32)), f.elem(5u32));
    }

    #[test]
    fn zero_unknowns_is_identity() {
        let f = toy();
        let hm = HintMatrix::from_parts(1, 2, vec![7, 3], vec![f.elem(0u32)]).unwrap();
        let k = [Some(f.elem(1u32)), Some(f.elem(2u32)), Some(f.elem(3u32))];
        assert_eq!(
            solve_hint(&f, &hm, &k, None).unwrap(),
            vec![f.elem(1u32), f.elem(2u32), f.elem(3u32)]
        );
    }

    #[test]
    fn deterministic_with_seed() {
        let f = PrimeField::hint_field();
        let h: Vec<_> = (0..5u8)
            .map(|i| f.from_digest(&Digest::hash(&[i])))
            .collect();
        let a = build_hint_matrix(&f, &h, 2, &mut ChaCha8Rng::seed_from_u64(9));
        let b = build_hint_matrix(&f, &h, 2, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(a.r().iter().all(|&r| r != 0));
    }

    #[test]
    fn residue_and_range_checks() {
        let f = PrimeField::hint_field();
        let h: Vec<_> = (0..3u8)
            .map(|i| f.from_digest(&Digest::hash(&[i])))
            .collect();
        let hm = build_hint_matrix(&f, &h, 1, &mut ChaCha8Rng::seed_from_u64(1));
        let res: Vec<u32> = h
            .iter()
            .map(|e| e.to_digest().unwrap().rem_u32(11))
            .collect();
        let knowns = [None, Some(h[1].clone()), Some(h[2].clone())];
        assert_eq!(solve_hint(&f, &hm, &knowns, Some((&res, 11))).unwrap(), h);
        let mut wrong = res.clone();
        wrong[0] = (wrong[0] + 1) % 11;
        assert_eq!(
            solve_hint(&f, &hm, &knowns, Some((&wrong, 11))),
            Err(MatchError::ResidueMismatch)
        );

        // A recovered value above 2^256 is rejected.
        let top = f.sub(&f.zero(), &f.elem(1u32));
        let hm = build_hint_matrix_with(&f, &[top, h[1].clone()], 1, vec![1]);
        let k = [None, Some(h[1].clone())];
        assert_eq!(
            solve_hint(&f, &hm, &k, None),
            Err(MatchError::ValueOutOfRange)
        );
    }

    #[test]
    fn random_recovery_full_field() {
        let f = PrimeField::hint_field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..200 {
            let gamma = 1 + trial % 3;
            let beta = 1 + trial % 4;
            let h: Vec<_> = (0..gamma + beta)
                .map(|_| f.from_digest(&Digest::random(&mut rng)))
                .collect();
            let hm = build_hint_matrix(&f, &h, gamma, &mut rng);
            for mask in 0u32..(1 << (gamma + beta)) {
                if mask.count_ones() as usize > gamma {
                    continue;
                }
                let knowns: Vec<_> = (0..gamma + beta)
                    .map(|c| {
                        if mask >> c & 1 == 1 {
                            None
                        } else {
                            Some(h[c].clone())
                        }
                    })
                    .collect();
                assert_eq!(solve_hint(&f, &hm, &knowns, None).unwrap(), h);
            }
        }
    }
}
