"""File persistence: Matrix Market matrices, vectors, JSON/CSV reports."""
