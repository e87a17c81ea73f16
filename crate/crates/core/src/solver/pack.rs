use crate::error::SolveError;
use crate::model::{CustomerSet, GameState, Instance, Pieces, Player, Player::*};

/// Bit layout for `(turn, pieces_i, pieces_ii)` in one `u64`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Packer {
    bits: u32,
    h: usize,
    k: usize,
}

impl Packer {
    pub(crate) fn new(inst: &Instance) -> Result<Packer, SolveError> {
        let n = inst.graph().vertex_count().max(2);
        let bits = usize::BITS - (n - 1).leading_zeros();
        let h = inst.starts(I).len();
        let k = inst.starts(II).len();
        if 1 + (h + k) as u32 * bits > 64 {
            return Err(SolveError::Unsupported(format!(
                "{} pieces on {n} vertices do not fit a 64-bit position key",
                h + k
            )));
        }
        Ok(Packer { bits, h, k })
    }

    pub(crate) fn pack(&self, s: &GameState) -> (u64, u64) {
        let mut key = u64::from(s.turn == II);
        let mut shift = 1;
        for &v in s.pieces_i.iter().chain(s.pieces_ii.iter()) {
            key |= u64::from(v) << shift;
            shift += self.bits;
        }
        (s.remaining.0, key)
    }

    pub(crate) fn unpack(&self, remaining: u64, key: u64) -> GameState {
        let mask = (1u64 << self.bits) - 1;
        let turn = if key & 1 == 1 { II } else { I };
        let mut shift = 1;
        let mut take = |count: usize| -> Pieces {
            (0..count)
                .map(|_| {
                    let v = (key >> shift & mask) as u32;
                    shift += self.bits;
                    v
                })
                .collect()
        };
        let pieces_i = take(self.h);
        let pieces_ii = take(self.k);
        GameState {
            turn,
            pieces_i,
            pieces_ii,
            remaining: CustomerSet(remaining),
        }
    }

    pub(crate) fn turn_of(key: u64) -> Player {
        if key & 1 == 1 {
            II
        } else {
            I
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Graph;

    #[test]
    fn round_trip() {
        let g = Graph::from_edges(300, false, &[(0, 1)]).unwrap();
        let inst = Instance::new(g, [1, 2, 3], vec![299, 5], vec![7]);
        let p = Packer::new(&inst).unwrap();
        let mut s = inst.initial_state().unwrap();
        s.turn = II;
        s.remaining = s.remaining.without(1);
        let (r, k) = p.pack(&s);
        assert_eq!(p.unpack(r, k), s);
    }
}
