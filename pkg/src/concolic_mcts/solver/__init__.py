from .core import (BitBudgetExceeded, Model, Solver, bits_to_input, check,
                   check_flip, to_input_vector)

__all__ = ["BitBudgetExceeded", "Model", "Solver", "bits_to_input", "check",
           "check_flip", "to_input_vector"]
