from __future__ import annotations

from ..certs import ANY_POLICY
from .results import ANY


def intersect_policies(current, cert_policies):
    """Intersect a working policy set with one certificate's policies.

    ``ANY`` is the identity. A certificate without a certificatePolicies
    extension (``None``) counts as ``ANY``, as does one asserting anyPolicy.
    """
    if cert_policies is None or ANY_POLICY in cert_policies:
        other = ANY
    else:
        other = frozenset(cert_policies)
    if current is ANY:
        return other
    if other is ANY:
        return frozenset(current)
    return frozenset(current) & other


def as_oid_list(policies) -> tuple:
    if policies is ANY:
        return (ANY_POLICY,)
    return tuple(sorted(policies))
