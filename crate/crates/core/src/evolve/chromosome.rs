//! Bit-string genotype: three 7-bit genes, one per panel-angle index.
//!
//! Genes hold the reflected Gray code of the index, so adjacent grid points
//! always differ by a single bit and mutation can walk the grid without
//! multi-bit cliffs (plain binary puts, say, 51 and 52 three flips apart,
//! which reliably strands the search one step from the optimum).
//!
//! Seven bits per gene cover code values whose decoded index ranges over
//! 0..=127; the design grid only uses 0..=64, and codes above that decode
//! to no shape at all, so offspring carrying them fall to the admissibility
//! rejection step like any other infeasible design.

use std::fmt;

use crate::geometry::{GeometryError, MorphShape};

/// Reflected Gray code of a 7-bit value.
pub fn index_to_gene(index: u8) -> u8 {
    index ^ (index >> 1)
}

/// Inverse Gray transform of a 7-bit gene.
pub fn gene_to_index(gene: u8) -> u8 {
    let mut index = gene;
    index ^= index >> 4;
    index ^= index >> 2;
    index ^= index >> 1;
    index
}

pub const GENE_BITS: usize = 7;
pub const GENE_COUNT: usize = 3;
pub const CHROMOSOME_BITS: usize = GENE_BITS * GENE_COUNT;
/// Interior segment boundaries available as crossover cut points.
pub const CROSSOVER_BOUNDARIES: usize = CHROMOSOME_BITS - 1;

const BITS_MASK: u32 = (1 << CHROMOSOME_BITS) - 1;
const GENE_MASK: u32 = (1 << GENE_BITS) - 1;

/// Packed 21-bit chromosome. Bit position 0 is the most significant bit of
/// the first gene, so the derived ordering is lexicographic over the bit
/// string.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chromosome(u32);

impl Chromosome {
    pub fn from_genes(genes: [u8; GENE_COUNT]) -> Self {
        let mut packed = 0u32;
        for gene in genes {
            debug_assert!(u32::from(gene) <= GENE_MASK);
            packed = (packed << GENE_BITS) | (u32::from(gene) & GENE_MASK);
        }
        Self(packed)
    }

    /// Encodes grid indices as Gray-coded genes.
    pub fn from_indices(indices: [u8; GENE_COUNT]) -> Self {
        Self::from_genes(indices.map(index_to_gene))
    }

    /// Decoded per-gene indices; values above the grid maximum mark an
    /// infeasible genotype.
    pub fn indices(&self) -> [u8; GENE_COUNT] {
        self.genes().map(gene_to_index)
    }

    pub fn genes(&self) -> [u8; GENE_COUNT] {
        let mut genes = [0u8; GENE_COUNT];
        for (i, gene) in genes.iter_mut().enumerate() {
            let shift = GENE_BITS * (GENE_COUNT - 1 - i);
            *gene = ((self.0 >> shift) & GENE_MASK) as u8;
        }
        genes
    }

    pub fn bit(&self, position: usize) -> bool {
        debug_assert!(position < CHROMOSOME_BITS);
        (self.0 >> (CHROMOSOME_BITS - 1 - position)) & 1 == 1
    }

    pub fn with_bit(mut self, position: usize, value: bool) -> Self {
        let mask = 1u32 << (CHROMOSOME_BITS - 1 - position);
        if value {
            self.0 |= mask;
        } else {
            self.0 &= !mask;
        }
        self
    }

    pub fn flipped_bit(self, position: usize) -> Self {
        Self(self.0 ^ (1u32 << (CHROMOSOME_BITS - 1 - position)))
    }

    pub fn complement(self) -> Self {
        Self(!self.0 & BITS_MASK)
    }

    /// Decodes to a grid shape, or `None` when any gene decodes past the
    /// last grid index.
    pub fn decode(&self) -> Option<MorphShape> {
        match MorphShape::from_indices(self.indices()) {
            Ok(shape) => Some(shape),
            Err(GeometryError::IndexOutOfRange { .. }) => None,
            Err(_) => None,
        }
    }

    pub fn bit_string(&self) -> String {
        (0..CHROMOSOME_BITS).map(|p| if self.bit(p) { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bit_string())
    }
}

impl fmt::Debug for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chromosome({} {:?})", self.bit_string(), self.genes())
    }
}
