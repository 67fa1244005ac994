use std::cmp::Ordering;
use std::fmt;

/// Ranked input tree. Symbols are referenced by name so that one tree can be
/// fed to transducers with differently ordered alphabets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    pub symbol: String,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn new(symbol: impl Into<String>, children: Vec<Tree>) -> Self {
        Tree {
            symbol: symbol.into(),
            children,
        }
    }

    pub fn leaf(symbol: impl Into<String>) -> Self {
        Tree::new(symbol, Vec::new())
    }

    /// Number of nodes on the longest root-to-leaf path; a leaf has height 1.
    pub fn height(&self) -> usize {
        1 + self.children.iter().map(Tree::height).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    /// Subtree at a path of 1-based child positions.
    pub fn at(&self, path: &[usize]) -> Option<&Tree> {
        let mut cur = self;
        for &i in path {
            cur = cur.children.get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    /// Order by height, then by symbol name, then children left to right.
    pub fn cmp_by_name(&self, other: &Tree) -> Ordering {
        self.height()
            .cmp(&other.height())
            .then_with(|| self.cmp_same_height(other))
    }

    fn cmp_same_height(&self, other: &Tree) -> Ordering {
        self.symbol.cmp(&other.symbol).then_with(|| {
            for (a, b) in self.children.iter().zip(&other.children) {
                match a.cmp_by_name(b) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            self.children.len().cmp(&other.children.len())
        })
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
