use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate valuation for item {item}, bidder {bidder}")]
    DuplicateEdge { item: usize, bidder: usize },

    #[error("valuation of item {item} by bidder {bidder} must be positive, got {value}")]
    NonPositiveValue { item: usize, bidder: usize, value: f64 },

    #[error("index ({item}, {bidder}) out of range for a {items}x{bidders} market")]
    IndexOutOfRange {
        item: usize,
        bidder: usize,
        items: usize,
        bidders: usize,
    },

    #[error("a market needs at least one item and one bidder")]
    EmptyMarket,

    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid price {0}: prices must be finite and non-negative")]
    InvalidPrice(f64),

    #[error("{what}: search space of {size} exceeds the limit of {limit}")]
    TooLarge { what: &'static str, size: f64, limit: f64 },

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot place {edges} distinct edges in a market with only {capacity} pairs")]
    EdgeBudgetInfeasible { edges: usize, capacity: usize },

    #[error("assignment violates `{constraint}` by {violation:.3e}")]
    InfeasibleAssignment { constraint: String, violation: f64 },

    #[error("geometric grid needs a positive apex, got {0}")]
    NonPositiveApex(f64),

    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("linear program: {0}")]
    Lp(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
