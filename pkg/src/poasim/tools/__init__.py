"""
The tools sub-package for poasim.

Houses cross-cutting helpers used by every other sub-package, currently
the logging configuration.
"""
