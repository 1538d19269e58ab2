//! Operator-ordering experiments for Trotterized unitary coupled-cluster
//! ansätze: molecular integrals, fermionic and qubit operators, statevector
//! simulation, ansatz construction, VQE optimization and exact references.

pub mod ansatz;
pub mod bfgs;
pub mod error;
pub mod fci;
pub mod fermion;
pub mod integrals;
pub mod pauli;
pub mod rng;
pub mod state;
pub mod units;
pub mod vqe;

pub use ansatz::{
    kupccgsd_pool, order_program, set_trotter_number, uccsd_pool, AnsatzProgram, Form, OrderingStrategy, Pool,
    PoolDescriptor, ProgramDocument, Slot,
};
pub use error::{Error, Result};
pub use fci::{dissociation_reference, fci_ground_energy, sector_basis, FciResult, SectorBasis};
pub use fermion::{FermionOperator, Generator, LadderOp, Rank};
pub use integrals::{parse_fcidump, write_fcidump, MolecularIntegrals, OccupationBitstring};
pub use pauli::{jordan_wigner, PauliString, PauliSum};
pub use rng::SeededRng;
pub use state::{ExcitationKernel, SparseOperator, Statevector};
pub use vqe::{sgo_ordering, InitSpec, SgoOptions, UntrotterizedGradient, VqeOptions, VqeProblem, VqeResult};
