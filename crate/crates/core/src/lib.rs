//! Public-key encryption built on the word problem in small cancellation groups.
//!
//! The private key is a presentation satisfying C'(1/6), where Dehn's
//! algorithm decides the word problem. The public key is an isomorphic copy
//! scrambled by Tietze moves, with most relators dropped. A 1 bit is sent as
//! a word trivial in the public group, a 0 bit as a random word that is
//! almost surely not.

pub mod adversary;
pub mod codec;
pub mod format;
pub mod keygen;
pub mod presentations;
pub mod rng;
pub mod tietze;
pub mod words;

pub use codec::{decrypt, encrypt, Ciphertext, CodecError, Encoder};
pub use keygen::{keygen, KeyPair, KeygenError, PrivateKey, ProtocolParams, PublicKey};
pub use presentations::{DehnSolver, Lambda, Presentation, SymmetrizedSet, Verdict, WpVerdict};
pub use rng::Rng;
pub use tietze::{SubstitutionTable, TietzeSession};
pub use words::{Letter, Word, WordError};
