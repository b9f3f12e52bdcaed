"""Link-level simulation of grant-free code-domain NOMA with subspace activity detection."""

__version__ = "0.1.0"
