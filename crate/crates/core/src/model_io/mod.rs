//! Model serialization: the `.adt` ADTree text format and the versioned
//! `.cfm` container for every model type.

mod adt;
mod cfm;

use std::fs;
use std::path::Path;

pub use adt::{parse_adtree, print_adtree};
pub use cfm::{from_text, to_text, HEADER};

use crate::error::ModelIoError;
use crate::learners::FittedModel;

fn io_error(path: &Path, source: std::io::Error) -> ModelIoError {
    ModelIoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_model(model: &FittedModel, path: &Path) -> Result<(), ModelIoError> {
    let text = to_text(model)?;
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn load_model(path: &Path) -> Result<FittedModel, ModelIoError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    from_text(&text)
}

pub fn save_adtree(model: &crate::learners::AdTreeModel, path: &Path) -> Result<(), ModelIoError> {
    fs::write(path, print_adtree(model)).map_err(|e| io_error(path, e))
}

pub fn load_adtree(path: &Path) -> Result<crate::learners::AdTreeModel, ModelIoError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_adtree(&text)
}
