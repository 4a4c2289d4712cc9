use std::fmt;
use std::num::NonZeroU32;

/// A pushable/enqueueable item: a positive integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item(NonZeroU32);

impl Item {
    pub fn new(v: u64) -> Option<Item> {
        u32::try_from(v).ok().and_then(NonZeroU32::new).map(Item)
    }

    pub fn get(self) -> u64 {
        u64::from(self.0.get())
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Content of an item register.
///
/// `Bottom` is the initial "never written" value and `Taken` marks a slot
/// whose item has been dequeued. Both are distinct from every item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellValue {
    Item(Item),
    Bottom,
    Taken,
}

const RAW_BOTTOM: u64 = 0;
const RAW_TAKEN: u64 = 1;

impl CellValue {
    /// Packs the value into a machine word. Items occupy `2..=2^32`, so the
    /// two sentinels never collide with a payload.
    pub fn encode(self) -> u64 {
        match self {
            CellValue::Bottom => RAW_BOTTOM,
            CellValue::Taken => RAW_TAKEN,
            CellValue::Item(x) => x.get() + 1,
        }
    }

    /// Inverse of [`CellValue::encode`]. Words outside the encoding range
    /// decode as `None`.
    pub fn decode(raw: u64) -> Option<CellValue> {
        match raw {
            RAW_BOTTOM => Some(CellValue::Bottom),
            RAW_TAKEN => Some(CellValue::Taken),
            v => Item::new(v - 1).map(CellValue::Item),
        }
    }

    pub fn is_bottom(self) -> bool {
        self == CellValue::Bottom
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Item(x) => write!(f, "{x}"),
            CellValue::Bottom => f.write_str("bot"),
            CellValue::Taken => f.write_str("top"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sentinels_are_distinct() {
        assert_ne!(CellValue::Bottom.encode(), CellValue::Taken.encode());
        let one = CellValue::Item(Item::new(1).unwrap());
        assert_ne!(one.encode(), CellValue::Bottom.encode());
        assert_ne!(one.encode(), CellValue::Taken.encode());
        assert!(Item::new(0).is_none());
        assert!(Item::new(u64::from(u32::MAX) + 1).is_none());
    }

    proptest! {
        #[test]
        fn encoding_round_trips(v in 1u64..=u64::from(u32::MAX)) {
            let c = CellValue::Item(Item::new(v).unwrap());
            prop_assert_eq!(CellValue::decode(c.encode()), Some(c));
        }
    }
}
