"""Counterexample generators and their certified checkers."""
