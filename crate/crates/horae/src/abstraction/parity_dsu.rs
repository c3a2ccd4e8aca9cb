//! Union-find with parity: each element carries its polarity relative to the
//! set leader, so equality and negation links share one structure. Union by
//! size with path compression; parity is folded along the find path.

pub struct ParityDsu {
    parent: Vec<usize>,
    size: Vec<u32>,
    /// Parity of the edge to the parent: 0 = same polarity, 1 = flipped.
    parity: Vec<u8>,
}

impl ParityDsu {
    pub fn new(len: usize) -> Self {
        ParityDsu {
            parent: (0..len).collect(),
            size: vec![1; len],
            parity: vec![0; len],
        }
    }

    /// Leader of `i`'s set and `i`'s parity relative to it.
    pub fn find(&mut self, i: usize) -> (usize, u8) {
        if self.parent[i] == i {
            return (i, 0);
        }
        let (root, parent_parity) = self.find(self.parent[i]);
        let total = self.parity[i] ^ parent_parity;
        self.parent[i] = root;
        self.parity[i] = total;
        (root, total)
    }

    /// Merges the sets of `a` and `b` with relative parity `parity`
    /// (0: same polarity, 1: opposite). Returns `Err(())` when the sets are
    /// already joined with the opposite parity.
    pub fn union(&mut self, a: usize, b: usize, parity: u8) -> Result<(), ()> {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return if pa ^ pb == parity { Ok(()) } else { Err(()) };
        }
        let (big, small, edge) = if self.size[ra] >= self.size[rb] {
            // parity(small root -> big root) keeps pa ^ parity(a,b) ^ pb
            // consistent for all members.
            (ra, rb, pa ^ parity ^ pb)
        } else {
            (rb, ra, pa ^ parity ^ pb)
        };
        self.parent[small] = big;
        self.parity[small] = edge;
        self.size[big] += self.size[small];
        Ok(())
    }
}
