use rand::Rng;

const ABSENT: u32 = u32::MAX;

/// Subset of `0..capacity` with O(1) insert, remove, membership and uniform
/// sampling.
#[derive(Clone, Debug)]
pub(crate) struct IndexSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl IndexSet {
    pub fn new(capacity: usize) -> Self {
        IndexSet {
            items: Vec::new(),
            pos: vec![ABSENT; capacity],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.pos[x] != ABSENT
    }

    pub fn insert(&mut self, x: usize) -> bool {
        if self.contains(x) {
            return false;
        }
        self.pos[x] = self.items.len() as u32;
        self.items.push(x as u32);
        true
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let p = self.pos[x];
        if p == ABSENT {
            return false;
        }
        let last = self.items.pop().expect("non-empty");
        if last as usize != x {
            self.items[p as usize] = last;
            self.pos[last as usize] = p;
        }
        self.pos[x] = ABSENT;
        true
    }

    /// Uniform draw from the set minus `exclude`, or `None` if that is empty.
    #[inline]
    pub fn sample_without<R: Rng + ?Sized>(&self, rng: &mut R, exclude: Option<usize>) -> Option<usize> {
        match exclude {
            Some(x) if self.contains(x) => {
                let m = self.len() - 1;
                if m == 0 {
                    return None;
                }
                let i = rng.random_range(0..m);
                let item = self.items[i] as usize;
                // the excluded element swaps with the last slot
                Some(if item == x { self.items[m] as usize } else { item })
            }
            _ => {
                if self.is_empty() {
                    return None;
                }
                Some(self.items[rng.random_range(0..self.len())] as usize)
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().map(|&x| x as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn insert_remove_membership() {
        let mut s = IndexSet::new(10);
        assert!(s.insert(3));
        assert!(!s.insert(3));
        s.insert(7);
        s.insert(1);
        assert!(s.remove(3));
        assert!(!s.contains(3));
        assert_eq!(s.len(), 2);
        let mut v: Vec<_> = s.iter().collect();
        v.sort();
        assert_eq!(v, vec![1, 7]);
    }

    #[test]
    fn sampling_respects_exclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = IndexSet::new(5);
        for x in [0, 2, 4] {
            s.insert(x);
        }
        let mut seen = [0usize; 5];
        for _ in 0..3000 {
            seen[s.sample_without(&mut rng, Some(2)).unwrap()] += 1;
        }
        assert_eq!(seen[2], 0);
        assert!(seen[0] > 1300 && seen[4] > 1300);
        let mut one = IndexSet::new(3);
        one.insert(1);
        assert_eq!(one.sample_without(&mut rng, Some(1)), None);
        assert_eq!(one.sample_without(&mut rng, Some(0)), Some(1));
    }
}
