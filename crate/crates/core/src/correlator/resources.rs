use crate::{Error, Result};

/// Element counts of one `m`-way correlator for a `k`-bit syncword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceReport {
    pub xnor_gates: usize,
    /// Two-input adders across all `m` adder trees.
    pub adders: usize,
    /// `m − 1` in the max-select tree plus the threshold comparator.
    pub comparators: usize,
    pub register_bits: usize,
    pub adder_tree_depth: u32,
    pub comparator_tree_depth: u32,
    pub bits_per_cycle: usize,
}

fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

pub fn arch_resources(k: usize, m: usize) -> Result<ResourceReport> {
    if k < 2 {
        return Err(Error::config(format!("k must be at least 2, got {k}")));
    }
    if m == 0 {
        return Err(Error::config("m must be at least 1"));
    }
    Ok(ResourceReport {
        xnor_gates: m * k,
        adders: m * (k - 1),
        comparators: m,
        register_bits: m + k - 1,
        adder_tree_depth: ceil_log2(k),
        comparator_tree_depth: ceil_log2(m),
        bits_per_cycle: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        let r = arch_resources(300, 8).unwrap();
        assert_eq!(
            r,
            ResourceReport {
                xnor_gates: 2400,
                adders: 2392,
                comparators: 8,
                register_bits: 307,
                adder_tree_depth: 9,
                comparator_tree_depth: 3,
                bits_per_cycle: 8,
            }
        );
        let r = arch_resources(2, 1).unwrap();
        assert_eq!((r.xnor_gates, r.adders, r.comparators), (2, 1, 1));
        assert_eq!((r.adder_tree_depth, r.comparator_tree_depth), (1, 0));
        let r = arch_resources(500, 8).unwrap();
        assert_eq!((r.xnor_gates, r.adders), (4000, 3992));
    }

    #[test]
    fn ceil_log2_edges() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(256), 8);
        assert_eq!(ceil_log2(257), 9);
        assert!(arch_resources(1, 1).is_err());
        assert!(arch_resources(4, 0).is_err());
    }
}
