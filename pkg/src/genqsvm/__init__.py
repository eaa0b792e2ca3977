"""Evolutionary design of quantum feature-map kernels for SVM classification.

A genome of bits decodes to a data-dependent circuit; its statevector
overlap defines a kernel; an SMO-trained SVM turns the kernel into a
classifier; NSGA-II evolves the genome population to maximize held-out
accuracy while minimizing circuit size.
"""
from .datasets import (Dataset, SymmetricMinMaxScaler, apply_scaler,
                       export_csv, fit_scaler, load_csv, make_blobs,
                       make_moons, split)
from .errors import (CapacityError, ConfigError, DataError,
                     DegenerateDataError)
from .evolution import (EvolutionConfig, GenerationStats,
                        GeneticFeatureMapClassifier, Individual, Objectives,
                        best_individual, crossover, crowding_distance,
                        dominates, evaluate, hypervolume, mutate,
                        non_dominated_sort, run, select_mu, size_metric,
                        weights_control)
from .genome import (CircuitSpec, GateSpec, Genome, circuit_from_dict,
                     circuit_to_dict, count_gates, decode_gene, decode_genome,
                     random_genome)
from .interpret import (ClusterDecomposition, ClusterReport, GridSpec,
                        boundary_grid, decompose, factor_kernel_check,
                        per_cluster_report, tensor_state_error)
from .simulator import (feature_state, feature_states, gram_matrix, kernel,
                        kernel_squared, write_gram_csv)
from .svm import (BinaryModel, MulticlassModel, QuantumKernelSVC, accuracy,
                  confusion, decision_function, solve_binary)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BinaryModel", "CapacityError", "CircuitSpec", "ClusterDecomposition",
    "ClusterReport", "ConfigError", "DataError", "Dataset",
    "DegenerateDataError", "EvolutionConfig", "GateSpec", "GenerationStats",
    "GeneticFeatureMapClassifier", "Genome", "GridSpec", "Individual",
    "MulticlassModel", "Objectives", "QuantumKernelSVC",
    "SymmetricMinMaxScaler", "accuracy", "apply_scaler", "best_individual",
    "boundary_grid", "circuit_from_dict", "circuit_to_dict", "confusion",
    "count_gates", "crossover", "crowding_distance", "decision_function",
    "decode_gene", "decode_genome", "decompose", "dominates", "evaluate",
    "export_csv", "factor_kernel_check", "feature_state", "feature_states",
    "fit_scaler", "gram_matrix", "hypervolume", "kernel", "kernel_squared",
    "load_csv", "make_blobs", "make_moons", "mutate", "non_dominated_sort",
    "per_cluster_report", "random_genome", "run", "select_mu", "size_metric",
    "solve_binary", "split", "tensor_state_error", "weights_control",
    "write_gram_csv",
]
