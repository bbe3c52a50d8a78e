"""Reviewed signup, manager approval, session tokens, and job authorization.

Signup produces a PENDING account; a manager approves or rejects it exactly
once. Only APPROVED accounts may touch collected data. The external identity
checks (platform ID confirmation, developer account) cannot be verified here,
so they are recorded as self-attestations for the manager to confirm
out-of-band during review.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import time
from typing import Callable

from .domain import Account, AccountStatus, Job, Role, Visibility, format_rfc3339
from .errors import AuthFailed, EmailTaken, InvalidState, Unauthorized, WeakPassword
from .store import Store

MIN_PASSWORD_LENGTH = 12
SESSION_TTL_S = 24 * 3600

# scrypt cost parameters: salted and deliberately slow.
_SCRYPT_N = 2**14
_SCRYPT_R = 8
_SCRYPT_P = 1


def hash_password(password: str, salt: bytes | None = None) -> str:
    salt = salt if salt is not None else secrets.token_bytes(16)
    key = hashlib.scrypt(
        password.encode("utf-8"), salt=salt,
        n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P, dklen=32,
    )
    return f"scrypt${_SCRYPT_N}${_SCRYPT_R}${_SCRYPT_P}${salt.hex()}${key.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, n, r, p, salt_hex, key_hex = stored.split("$")
        if scheme != "scrypt":
            return False
        key = hashlib.scrypt(
            password.encode("utf-8"), salt=bytes.fromhex(salt_hex),
            n=int(n), r=int(r), p=int(p), dklen=len(bytes.fromhex(key_hex)),
        )
    except (ValueError, TypeError):
        return False
    return hmac.compare_digest(key.hex(), key_hex)


# Authorization actions.
READ_JOB = "job:read"
EXPORT_JOB = "job:export"
WRITE_JOB = "job:write"
DELETE_JOB = "job:delete"
REVIEW_ACCOUNTS = "accounts:review"


def authorize(user: Account, action: str, job: Job | None = None) -> bool:
    """Pure allow/deny decision. Approval gates everything; PUBLIC jobs are
    readable/exportable by any approved account; writes need ownership or the
    manager role; account review is manager-only."""
    if user.status is not AccountStatus.APPROVED:
        return False
    if action == REVIEW_ACCOUNTS:
        return user.role is Role.MANAGER
    if job is None:
        return False
    owns = job.owner == user.account_id
    manager = user.role is Role.MANAGER
    if action in (READ_JOB, EXPORT_JOB):
        return owns or manager or job.spec.visibility is Visibility.PUBLIC
    if action in (WRITE_JOB, DELETE_JOB):
        return owns or manager
    return False


class AccountService:
    def __init__(self, store: Store, clock: Callable[[], float] = time.time):
        self._store = store
        self._clock = clock

    def _now(self) -> int:
        return int(self._clock())

    @staticmethod
    def _normalize_email(email: str) -> str:
        return email.strip().lower()

    def sign_up(self, email: str, password: str,
                identity_confirmed: bool = False,
                developer_account: bool = False) -> Account:
        email = self._normalize_email(email)
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        if self._store.get_account_by_email(email) is not None:
            raise EmailTaken(email)
        account = Account(
            account_id=f"acct-{secrets.token_hex(8)}",
            email=email,
            password_hash=hash_password(password),
            role=Role.RESEARCHER,
            status=AccountStatus.PENDING,
            identity_confirmed=identity_confirmed,
            developer_account=developer_account,
            created_at=self._now(),
        )
        self._store.put_account(account)
        return account

    def bootstrap_manager(self, email: str, password: str) -> Account:
        """Create the first (or another) manager account; managers are always
        APPROVED."""
        email = self._normalize_email(email)
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        if self._store.get_account_by_email(email) is not None:
            raise EmailTaken(email)
        account = Account(
            account_id=f"acct-{secrets.token_hex(8)}",
            email=email,
            password_hash=hash_password(password),
            role=Role.MANAGER,
            status=AccountStatus.APPROVED,
            identity_confirmed=True,
            developer_account=True,
            created_at=self._now(),
        )
        self._store.put_account(account)
        return account

    def review(self, manager: Account, account_id: str,
               decision: AccountStatus) -> Account:
        """Decide a PENDING account. One decision per account, managers only."""
        if manager.role is not Role.MANAGER or manager.status is not AccountStatus.APPROVED:
            raise Unauthorized("only an approved manager may review accounts")
        if decision not in (AccountStatus.APPROVED, AccountStatus.REJECTED):
            raise InvalidState(f"decision must be APPROVED or REJECTED, got {decision}")
        target = self._store.get_account(account_id)
        if target.status is not AccountStatus.PENDING:
            raise InvalidState(f"account already {target.status.value}")
        self._store.set_account_status(account_id, decision)
        return self._store.get_account(account_id)

    # -- sessions -----------------------------------------------------------

    def login(self, email: str, password: str) -> tuple[str, int]:
        """Issue a bearer token valid for 24 h. Works for any account whose
        credentials check out; data access is still gated by approval."""
        account = self._store.get_account_by_email(self._normalize_email(email))
        if account is None or not verify_password(password, account.password_hash):
            raise AuthFailed("bad email or password")
        token = secrets.token_urlsafe(32)
        expires_at = self._now() + SESSION_TTL_S
        self._store.put_session(token, account.account_id, expires_at)
        return token, expires_at

    def authenticate(self, token: str) -> Account | None:
        """Resolve a bearer token; renews the session on use (sliding expiry)."""
        session = self._store.get_session(token)
        if session is None:
            return None
        account_id, expires_at = session
        now = self._now()
        if now >= expires_at:
            self._store.delete_session(token)
            return None
        self._store.put_session(token, account_id, now + SESSION_TTL_S)
        try:
            return self._store.get_account(account_id)
        except Exception:
            return None

    def logout(self, token: str) -> None:
        self._store.delete_session(token)
