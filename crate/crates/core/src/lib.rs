pub mod error;
pub mod fock;
pub mod interferometer;
pub mod symmetry;
pub mod channels;
pub mod suppression;
pub mod protocol;
pub mod io;
pub mod scenario;
pub mod verify;
