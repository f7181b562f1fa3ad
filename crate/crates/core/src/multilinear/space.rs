use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::spectral::field::check_lattice;

/// Largest direct-index table a tuple space may allocate.
const MAX_LOOKUP: usize = 1 << 26;

/// All tuples `(n₁, …, n_p)` of nonzero multiples of `m` with `|n_j| <= n_max`
/// and `Σ n_j = 0`, in a fixed order.
///
/// Modes are addressed by their position in the sorted alphabet
/// `[-n_max, …, -m, m, …, n_max]`.
#[derive(Debug)]
pub struct TupleSpace {
    m: usize,
    n_max: usize,
    arity: usize,
    alphabet: Vec<i64>,
    positions: Vec<u8>,
    lookup: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl TupleSpace {
    fn build(m: usize, n_max: usize, arity: usize) -> Result<Self> {
        check_lattice(m, n_max)?;
        if !(2..=6).contains(&arity) {
            return Err(Error::UnsupportedArity(arity));
        }
        let k = (n_max / m) as i64;
        let alphabet: Vec<i64> = (1..=k)
            .rev()
            .map(|j| -j * m as i64)
            .chain((1..=k).map(|j| j * m as i64))
            .collect();
        let a = alphabet.len();
        let lookup_len = a
            .checked_pow(arity as u32 - 1)
            .filter(|&n| n <= MAX_LOOKUP && a < 256)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "tuple table for arity {arity}, n_max {n_max}, m {m} is too large"
                ))
            })?;

        let mut positions = Vec::new();
        let mut lookup = vec![NONE; lookup_len];
        let mut count = 0u32;
        let mut digits = vec![0usize; arity - 1];
        for (code, slot) in lookup.iter_mut().enumerate() {
            let mut c = code;
            for d in digits.iter_mut() {
                *d = c % a;
                c /= a;
            }
            let sum: i64 = digits.iter().map(|&d| alphabet[d]).sum();
            if let Some(last) = position(m, n_max, -sum) {
                positions.extend(digits.iter().map(|&d| d as u8));
                positions.push(last);
                *slot = count;
                count += 1;
            }
        }
        Ok(Self {
            m,
            n_max,
            arity,
            alphabet,
            positions,
            lookup,
        })
    }

    /// Shared, memoized space for `(m, n_max, arity)`.
    pub fn shared(m: usize, n_max: usize, arity: usize) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(usize, usize, usize), Arc<TupleSpace>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = (m, n_max, arity);
        if let Some(s) = cache.lock().expect("cache poisoned").get(&key) {
            return Ok(s.clone());
        }
        let space = Arc::new(Self::build(m, n_max, arity)?);
        cache
            .lock()
            .expect("cache poisoned")
            .insert(key, space.clone());
        Ok(space)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn alphabet(&self) -> &[i64] {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Alphabet positions of tuple `id`.
    pub fn positions(&self, id: usize) -> &[u8] {
        &self.positions[id * self.arity..(id + 1) * self.arity]
    }

    pub fn modes(&self, id: usize) -> Vec<i64> {
        self.positions(id)
            .iter()
            .map(|&p| self.alphabet[p as usize])
            .collect()
    }

    pub fn position_of(&self, n: i64) -> Option<u8> {
        position(self.m, self.n_max, n)
    }

    /// Id of the tuple with the given alphabet positions (last one implied).
    pub fn id_of_positions(&self, pos: &[u8]) -> Option<usize> {
        let a = self.alphabet.len();
        let code = pos[..self.arity - 1]
            .iter()
            .rev()
            .fold(0usize, |acc, &p| acc * a + p as usize);
        match self.lookup[code] {
            NONE => None,
            id => Some(id as usize),
        }
    }

    /// Id of a tuple of modes, if it is admissible.
    pub fn id_of(&self, modes: &[i64]) -> Option<usize> {
        if modes.len() != self.arity || modes.iter().sum::<i64>() != 0 {
            return None;
        }
        let mut pos = [0u8; 6];
        for (slot, &n) in pos.iter_mut().zip(modes) {
            *slot = self.position_of(n)?;
        }
        self.id_of_positions(&pos[..self.arity])
    }

    /// Id of the tuple `(−n₁, …, −n_p)`.
    pub fn negated_id(&self, id: usize) -> usize {
        let a = self.alphabet.len() as u8;
        let mut pos = [0u8; 6];
        for (slot, &p) in pos.iter_mut().zip(self.positions(id)) {
            *slot = a - 1 - p;
        }
        self.id_of_positions(&pos[..self.arity])
            .expect("negation preserves admissibility")
    }
}

fn position(m: usize, n_max: usize, n: i64) -> Option<u8> {
    let a = n.unsigned_abs() as usize;
    if a == 0 || a > n_max || !a.is_multiple_of(m) {
        return None;
    }
    let k = n_max / m;
    let j = a / m;
    Some(if n < 0 { k - j } else { k + j - 1 } as u8)
}
