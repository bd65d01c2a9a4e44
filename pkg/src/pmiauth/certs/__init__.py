"""Certificate, attribute certificate and revocation list records plus storage."""

from .extensions import ANY_POLICY, BasicConstraints, Extension
from .names import Name
from .records import (
    Attribute,
    AttributeCertificate,
    Holder,
    PublicKeyCertificate,
    PublicKeyInfo,
    RevocationList,
    RevokedEntry,
    build_attribute_certificate,
    build_certificate,
    build_revocation_list,
    encode_certificate,
    parse_any,
    parse_attribute_certificate,
    parse_certificate,
    parse_revocation_list,
)
from .store import (
    CertStore,
    LoadReport,
    TrustAnchor,
    TrustAnchorSet,
    armor,
    dearmor,
    load_attribute_certificate,
    load_certificate,
    load_revocation_list,
    load_store,
    read_der,
    save_item,
)
