"""Exact identification of mediation densities under mediator and outcome missingness."""
