pub mod circuits;
pub mod cli;
pub mod cliffordsim;
pub mod entropy;
pub mod game_engine;
pub mod games;
pub mod grid;
pub mod pauli;
pub mod seeds;
