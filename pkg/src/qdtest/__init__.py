"""Quantum testers for distribution closeness and k-wise uniformity, simulated
exactly on a dense state-vector engine with per-oracle query counting."""

from .amplitude import (AEConfig, AEDistribution, AEResult, amplitude_estimation,
                        exact_amplitude, grover_iterate, phase_distribution,
                        qpe_joint_state, zero_budget, zero_tester)
from .distributions import (BITSTRING, RANGE, Distribution, DistributionError,
                            load, point_mass, random_distribution, uniform)
from .oracles import (GARBAGE_STYLES, PurifiedOracle, closeness_instance,
                      closeness_unitary, encoder_layout, from_discrete_oracle,
                      from_pure_state_oracle, haar_unitary, kwise_encoder,
                      kwise_instance, make_purified_oracle, probability_encoder,
                      subset_superposition, u_copy)
from .statevec import (ControlledOp, MatrixOp, PermutationOp, PhaseFlipOp,
                       Projector, QuantumOp, QueryLedger, ReflectionOp,
                       RegisterError, RegisterLayout, SequenceOp, StateVector,
                       apply, controlled_z, dense_matrix_of, hadamard, inverse,
                       measure, new_basis_state, pauli_x, projector_norm_sq,
                       register_marginal, sample_register)
from .testers import (TestVerdict, estimate_l2_distance, kwise_uniformity_test,
                      l1_closeness, l2_closeness, repeat_majority,
                      tolerant_l2_closeness)

__version__ = "0.1.0"
