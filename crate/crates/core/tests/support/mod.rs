pub mod termgen;
