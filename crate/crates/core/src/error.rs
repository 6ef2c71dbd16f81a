use crate::map::CellIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cell ({}, {}) out of bounds for {width}x{height} map", cell.row, cell.col)]
    OutOfBounds {
        cell: CellIndex,
        width: usize,
        height: usize,
    },

    #[error("cell ({}, {}) is a no-coverage cell and has no priority", .0.row, .0.col)]
    NoCoverageCell(CellIndex),

    #[error("position ({x:.3}, {y:.3}) outside map bounds")]
    PositionOutOfBounds { x: f64, y: f64 },

    #[error("{file}: line {line}, token {col}: {msg}")]
    Parse {
        file: String,
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(file: impl Into<String>, line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            col,
            msg: msg.into(),
        }
    }
}
