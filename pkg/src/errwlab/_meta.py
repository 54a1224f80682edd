"""Single source for the package version string used in result provenance.

Kept in its own module so the harness can embed it without importing the
package root (and pyproject mirrors it at release time).
"""

PACKAGE_VERSION = "0.1.0"
