"""Tenant-scoped users, groups, and transitive membership."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .clock import Clock
from .errors import conflict, not_found, validation_error
from .ids import EntityKind, EntityRef, generate_id
from .store import RecordStore, Txn

USERS = "users"
USER_NAMES = "user_names"  # "<tenant>:<username>" -> {user_id}
USER_LINKS = "user_links"  # "<tenant>:<institution>:<subject>" -> {user_id}
GROUPS = "groups"
GROUP_NAMES = "group_names"  # "<tenant>:<name>" -> {group_id}


@dataclass
class ExternalIdentity:
    alias: str
    external_subject: str
    email: str
    institution_entity_id: str
    display_name: str = ""

    def to_doc(self) -> dict[str, Any]:
        return {
            "alias": self.alias,
            "external_subject": self.external_subject,
            "email": self.email,
            "institution_entity_id": self.institution_entity_id,
            "display_name": self.display_name,
        }


@dataclass
class UserRecord:
    user_id: str
    tenant_id: str
    username: str
    email: str
    enabled: bool
    attributes: dict[str, str] = field(default_factory=dict)
    external_identities: list[dict[str, Any]] = field(default_factory=list)

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "UserRecord":
        return cls(
            user_id=doc["user_id"],
            tenant_id=doc["tenant_id"],
            username=doc["username"],
            email=doc["email"],
            enabled=doc["enabled"],
            attributes=dict(doc.get("attributes", {})),
            external_identities=list(doc.get("external_identities", [])),
        )


@dataclass
class Group:
    group_id: str
    tenant_id: str
    name: str
    members: list[EntityRef]
    roles: list[str]

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Group":
        return cls(
            group_id=doc["group_id"],
            tenant_id=doc["tenant_id"],
            name=doc["name"],
            members=[EntityRef.parse(m) for m in doc.get("members", [])],
            roles=list(doc.get("roles", [])),
        )


class UserRegistry:
    def __init__(self, store: RecordStore, clock: Clock):
        self._store = store
        self._clock = clock

    def register_user(
        self,
        tenant_id: str,
        username: str,
        email: str,
        attributes: dict[str, str] | None = None,
    ) -> str:
        if not username:
            raise validation_error("username must be non-empty")
        if "@" not in email:
            raise validation_error("email must be an email address")
        user_id = generate_id("usr")

        def op(txn: Txn) -> None:
            self._create_in_txn(txn, tenant_id, user_id, username, email, attributes or {}, [])

        self._store.transact(op)
        return user_id

    def _create_in_txn(
        self,
        txn: Txn,
        tenant_id: str,
        user_id: str,
        username: str,
        email: str,
        attributes: dict[str, str],
        external_identities: list[dict[str, Any]],
    ) -> None:
        name_key = f"{tenant_id}:{username}"
        if txn.get(USER_NAMES, name_key) is not None:
            raise conflict(f"username {username!r} already taken in tenant")
        txn.put(USER_NAMES, name_key, {"user_id": user_id})
        txn.put(
            USERS,
            user_id,
            {
                "user_id": user_id,
                "tenant_id": tenant_id,
                "username": username,
                "email": email,
                "enabled": True,
                "attributes": attributes,
                "external_identities": external_identities,
                "created_at": self._clock.now(),
            },
        )

    def find_or_create_linked(self, txn: Txn, tenant_id: str, identity: ExternalIdentity) -> str:
        """Find-or-create a local user keyed on (institution, external subject)."""
        link_key = f"{tenant_id}:{identity.institution_entity_id}:{identity.external_subject}"
        linked = txn.get(USER_LINKS, link_key)
        if linked is not None:
            user_id = linked["user_id"]
            doc = txn.get(USERS, user_id)
            assert doc is not None, "dangling user link"
            aliases = {e["alias"] for e in doc["external_identities"]}
            if identity.alias not in aliases:
                doc["external_identities"].append(identity.to_doc())
                txn.put(USERS, user_id, doc)
            return user_id
        user_id = generate_id("usr")
        username = f"{identity.external_subject}%{identity.institution_entity_id}"
        self._create_in_txn(
            txn, tenant_id, user_id, username, identity.email, {}, [identity.to_doc()]
        )
        txn.put(USER_LINKS, link_key, {"user_id": user_id})
        return user_id

    def set_user_enabled(self, tenant_id: str, user_id: str, enabled: bool) -> UserRecord:
        def op(txn: Txn) -> UserRecord:
            doc = txn.get(USERS, user_id)
            if doc is None or doc["tenant_id"] != tenant_id:
                raise not_found(f"user {user_id} not found")
            doc["enabled"] = enabled
            txn.put(USERS, user_id, doc)
            return UserRecord.from_doc(doc)

        return self._store.transact(op)

    def get_user(self, tenant_id: str, user_id: str) -> UserRecord:
        doc = self._store.get(USERS, user_id)
        if doc is None or doc["tenant_id"] != tenant_id:
            raise not_found(f"user {user_id} not found")
        return UserRecord.from_doc(doc)

    def list_users(self, tenant_id: str) -> list[UserRecord]:
        docs = [d for _, d in self._store.scan(USERS) if d["tenant_id"] == tenant_id]
        docs.sort(key=lambda d: d.get("created_at", 0))
        return [UserRecord.from_doc(d) for d in docs]

    def user_status(self, user_id: str) -> tuple[bool, bool]:
        """(exists, enabled) — consumed by token validation."""
        doc = self._store.get(USERS, user_id)
        if doc is None:
            return False, False
        return True, bool(doc["enabled"])


class GroupRegistry:
    def __init__(self, store: RecordStore, users: UserRegistry):
        self._store = store
        self._users = users

    def create_group(self, tenant_id: str, name: str, roles: list[str] | None = None) -> str:
        if not name:
            raise validation_error("group name must be non-empty")
        group_id = generate_id("grp")
        name_key = f"{tenant_id}:{name}"

        def op(txn: Txn) -> None:
            if txn.get(GROUP_NAMES, name_key) is not None:
                raise conflict(f"group name {name!r} is taken")
            txn.put(GROUP_NAMES, name_key, {"group_id": group_id})
            txn.put(
                GROUPS,
                group_id,
                {
                    "group_id": group_id,
                    "tenant_id": tenant_id,
                    "name": name,
                    "members": [],
                    "roles": list(roles or []),
                },
            )

        self._store.transact(op)
        return group_id

    def get_group(self, group_id: str, *, tenant_id: str | None = None) -> Group:
        doc = self._store.get(GROUPS, group_id)
        if doc is None or (tenant_id is not None and doc["tenant_id"] != tenant_id):
            raise not_found(f"group {group_id} not found")
        return Group.from_doc(doc)

    def list_groups(self, tenant_id: str) -> list[Group]:
        return [
            Group.from_doc(d) for _, d in self._store.scan(GROUPS) if d["tenant_id"] == tenant_id
        ]

    def add_member(self, group_id: str, member: EntityRef, *, tenant_id: str | None = None) -> None:
        def op(txn: Txn) -> None:
            doc = txn.get(GROUPS, group_id)
            if doc is None or (tenant_id is not None and doc["tenant_id"] != tenant_id):
                raise not_found(f"group {group_id} not found")
            if member.kind not in (EntityKind.USER, EntityKind.GROUP):
                raise validation_error("group members must be users or groups")
            if member.tenant_id != doc["tenant_id"]:
                raise validation_error("group members must belong to the group's tenant")
            self._check_member_exists(txn, member)
            rendered = member.render()
            if rendered in doc["members"]:
                raise conflict("already a member")
            if member.kind == EntityKind.GROUP and self._reaches(txn, member.local_id, group_id):
                raise validation_error("membership cycle")
            doc["members"].append(rendered)
            txn.put(GROUPS, group_id, doc)

        self._store.transact(op)

    def remove_member(self, group_id: str, member: EntityRef, *, tenant_id: str | None = None) -> None:
        def op(txn: Txn) -> None:
            doc = txn.get(GROUPS, group_id)
            if doc is None or (tenant_id is not None and doc["tenant_id"] != tenant_id):
                raise not_found(f"group {group_id} not found")
            rendered = member.render()
            if rendered not in doc["members"]:
                raise not_found("not a member")
            doc["members"].remove(rendered)
            txn.put(GROUPS, group_id, doc)

        self._store.transact(op)

    def is_member(self, group_id: str, entity: EntityRef) -> bool:
        """Transitive membership through nested groups."""
        target = entity.render()
        queue = [group_id]
        visited: set[str] = set()
        while queue:
            current = queue.pop()
            if current in visited:
                continue
            visited.add(current)
            doc = self._store.get(GROUPS, current)
            if doc is None:
                continue
            for rendered in doc["members"]:
                if rendered == target:
                    return True
                ref = EntityRef.parse(rendered)
                if ref.kind == EntityKind.GROUP:
                    queue.append(ref.local_id)
        return False

    def group_roles(self, group_id: str) -> list[str]:
        doc = self._store.get(GROUPS, group_id)
        return [] if doc is None else list(doc.get("roles", []))

    def _check_member_exists(self, txn: Txn, member: EntityRef) -> None:
        if member.kind == EntityKind.USER:
            doc = txn.get(USERS, member.local_id)
            if doc is None or doc["tenant_id"] != member.tenant_id:
                raise not_found(f"user {member.local_id} not found")
        else:
            doc = txn.get(GROUPS, member.local_id)
            if doc is None or doc["tenant_id"] != member.tenant_id:
                raise not_found(f"group {member.local_id} not found")

    def _reaches(self, txn: Txn, start_group: str, target_group: str) -> bool:
        """True if target_group is reachable from start_group via nesting."""
        if start_group == target_group:
            return True
        queue = [start_group]
        visited: set[str] = set()
        while queue:
            current = queue.pop()
            if current in visited:
                continue
            visited.add(current)
            doc = txn.get(GROUPS, current)
            if doc is None:
                continue
            for rendered in doc["members"]:
                ref = EntityRef.parse(rendered)
                if ref.kind == EntityKind.GROUP:
                    if ref.local_id == target_group:
                        return True
                    queue.append(ref.local_id)
        return False
