use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Choose;

/// The pending set `G`. A rule is queued at most once while pending.
pub(crate) struct Worklist {
    queue: VecDeque<usize>,
    pending: FixedBitSet,
    rng: Option<ChaCha8Rng>,
    forced: Option<usize>,
}

impl Worklist {
    pub fn new(n: usize, choose: Choose) -> Self {
        Self {
            queue: VecDeque::with_capacity(n),
            pending: FixedBitSet::with_capacity(n),
            rng: match choose {
                Choose::Fifo => None,
                Choose::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            },
            forced: None,
        }
    }

    /// Makes the next `pop` return `i` if it is pending by then.
    pub fn prioritize(&mut self, i: usize) {
        self.forced = Some(i);
    }

    pub fn pending(&self) -> &FixedBitSet {
        &self.pending
    }

    /// Schedules every rule of `set` that is not already pending, in index order.
    pub fn extend_from(&mut self, set: &FixedBitSet) {
        for j in set.ones() {
            if !self.pending.put(j) {
                self.queue.push_back(j);
            }
        }
    }

    pub fn remove_all(&mut self, set: &FixedBitSet) {
        self.pending.difference_with(set);
        let pending = &self.pending;
        self.queue.retain(|&j| pending.contains(j));
    }

    pub fn pop(&mut self) -> Option<usize> {
        if let Some(i) = self.forced.take() {
            if self.pending.contains(i) {
                self.queue.retain(|&j| j != i);
                self.pending.set(i, false);
                return Some(i);
            }
        }
        let i = match &mut self.rng {
            None => self.queue.pop_front()?,
            Some(rng) => {
                if self.queue.is_empty() {
                    return None;
                }
                let k = rng.gen_range(0..self.queue.len());
                self.queue.swap_remove_back(k)?
            }
        };
        self.pending.set(i, false);
        Some(i)
    }
}
