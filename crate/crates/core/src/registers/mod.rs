//! Shared-memory layer: atomic cells, the collect-sum counter, renaming,
//! and small standalone objects built on them.

mod counter;
mod memory;
mod objects;
mod renaming;
mod value;

pub use counter::{Collect, CounterLayout, CounterRead};
pub use memory::*;
pub use objects::{CounterObject, FaiObject, ObjectOp, RegisterObject};
pub use renaming::{grid_size, name_bound, GridLayout, RenameMachine, RenameWalk, RenamingObject, Walk};
pub use value::{CellValue, Item};

/// Row-major 2-D array `[1..][1..=width]` of cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    pub region: Region,
    /// Logical index of entry `[1][1]`.
    pub offset: u64,
    pub width: u64,
}

impl Matrix {
    pub fn new(region: Region, offset: u64, width: u64) -> Matrix {
        Matrix { region, offset, width }
    }

    /// Cell `[row][col]`, both 1-based.
    pub fn cell(&self, row: u64, col: u64) -> CellId {
        debug_assert!(row >= 1 && (1..=self.width).contains(&col));
        self.region.cell(self.offset + (row - 1) * self.width + (col - 1))
    }
}

/// Extracts the reply of the previous access, which must be present.
pub(crate) fn reply_of(reply: Option<u64>) -> Result<u64, Fault> {
    reply.ok_or_else(|| Fault::Corrupt("operation resumed without the reply it waits for".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_rows_are_contiguous() {
        let m = Matrix::new(Region::WHOLE, 3, 3);
        assert_eq!(m.cell(1, 1), CellId(3));
        assert_eq!(m.cell(1, 3), CellId(5));
        assert_eq!(m.cell(2, 1), CellId(6));
        let lane = Matrix::new(Region::new(1, 2), 0, 2);
        assert_eq!(lane.cell(1, 1), CellId(1));
        assert_eq!(lane.cell(1, 2), CellId(3));
    }
}
