"""Second-order approximations for componentwise maxima of bivariate elliptical samples with bounded radius."""

__version__ = "0.1.0"
