from .commands import EXIT_CONFIG_ERROR, EXIT_NUMERICAL_ERROR, cli

__all__ = ["cli", "EXIT_CONFIG_ERROR", "EXIT_NUMERICAL_ERROR"]
