//! The neural scorer: embeddings, bi-LSTMs, tagger heads, action classifier,
//! hand-written backpropagation and the model file format.

mod gradcheck;
mod io;
mod lstm;
mod model;
mod tensor;
mod vocab;

pub use gradcheck::{check_gradients, BlockCheck};
pub use io::{from_bytes, load_model, save_model, to_bytes, ModelError, FORMAT_VERSION, MAGIC};
pub use lstm::{backward as lstm_backward, forward as lstm_forward, LstmCache};
pub use model::{Dims, Model, ParserSpec, Step, TokenIds, Transduction};
pub use tensor::{axpy, dot, sigmoid, softmax, Scalar, Tensor};
pub use vocab::{TagType, Vocab, Vocabularies, DEPLABEL, POS, UNKNOWN};
