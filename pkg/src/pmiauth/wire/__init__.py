"""Framed, signed request/response protocol between the verifier and the CVS."""

from .cache import CacheEntry, ResponseCache, cache_key, verdict_expiry
from .client import CvsClient, CvsClientConfig, validate_remote
from .framing import ErrorReason, FrameError, FrameServer, MsgType, decode_frame, encode_frame, error_frame, exchange
from .keys import KeyFile, load_key_file, load_trusted_keys, save_key_file
from .messages import SignedEnvelope, ValidationRequest, ValidationResponse, new_request_id, trusted_map
from .server import CvsConfig, CvsServer, CvsService, build_service, serve
