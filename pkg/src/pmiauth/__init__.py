"""Privilege verifier and certificate validation server for attribute-certificate based access control."""

__version__ = "0.1.0"
