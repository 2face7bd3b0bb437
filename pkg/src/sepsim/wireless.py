"""Slotted wireless mesh carrying sensor data to the gateway.

Time is divided into 10 ms slots, 100 slots to a superframe, one superframe
per sampling period. Each sensor owns a 25-slot lane: it samples at the
lane boundary and transmits in four fixed slots of its lane. Two-hop
sensors use the first two slots for the uplink to their relay and leave the
last two for the relay's forward transmission, so a packet can cross both
hops inside the frame it was born in. Every transmission hops channel by
absolute slot number; a shared blacklist can shrink the hop set when a
channel goes bad and probes it for recovery. Packets are retried until
delivered, never dropped.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .kernel import ConfigurationError, RngStream

SLOT_S = 0.01
FRAME_SLOTS = 100
LANE_SLOTS = 25
# Offsets cover all residues mod gcd(FRAME_SLOTS, 16) = 4, which is what
# makes the hop pattern visit every channel equally over 16 superframes.
ATTEMPT_OFFSETS = (2, 8, 15, 21)
HOP0_OFFSETS = (2, 8)
HOP1_OFFSETS = (15, 21)
PROBE_SLOT = 49
CONTROLLER_SLOT = 99

CHANNELS = tuple(range(11, 27))

# Fixed hop order, chosen once so adjacent attempts land far apart in RF.
HOP_SEQUENCE = (23, 12, 19, 26, 11, 21, 14, 17, 22, 15, 25, 13, 18, 24, 20, 16)


def hop_channel(usable: tuple[int, ...] | list[int], asn: int, node_offset: int = 0) -> int:
    """Channel for a transmission in absolute slot ``asn``."""
    return usable[(asn + node_offset) % len(usable)]


@dataclass
class Packet:
    packet_id: int
    origin: str
    created: float
    reading: object
    delivered: float | None = None

    @property
    def latency(self) -> float | None:
        if self.delivered is None:
            return None
        return self.delivered - self.created


@dataclass(frozen=True)
class JamWindow:
    start: float
    end: float
    channels: frozenset[int]
    intensity: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.intensity <= 1.0:
            raise ConfigurationError(f"jam intensity must be in [0, 1], got {self.intensity}")
        bad = self.channels - set(CHANNELS)
        if bad:
            raise ConfigurationError(f"jam channels outside radio band: {sorted(bad)}")


@dataclass
class RadioEnvironment:
    """Per-attempt success probabilities, including interference."""

    p_link: float = 0.995
    p_jammed: float = 0.30
    jams: list[JamWindow] = field(default_factory=list)

    def success_prob(self, channel: int, now: float) -> float:
        intensity = 0.0
        for jam in self.jams:
            if channel in jam.channels and jam.start <= now < jam.end:
                intensity = max(intensity, jam.intensity)
        if intensity == 0.0:
            return self.p_link
        return self.p_link + intensity * (self.p_jammed - self.p_link)


class ChannelBlacklist:
    """Shared channel quality tracker with probing for readmission.

    Data attempts feed a sliding window per channel; a channel whose
    success rate drops under the threshold is pulled from the hop set,
    subject to a floor on how many channels must remain. Blacklisted
    channels are probed round robin and return after a run of clean
    probes. Probe traffic stays out of the data statistics.
    """

    def __init__(
        self,
        enabled: bool = True,
        window: int = 50,
        threshold: float = 0.60,
        min_samples: int = 20,
        floor: int = 4,
        probe_period_s: float = 10.0,
        readmit_successes: int = 5,
    ):
        if floor < 1:
            raise ConfigurationError("blacklist floor must keep at least one channel")
        self.enabled = enabled
        self.window = window
        self.threshold = threshold
        self.min_samples = min_samples
        self.floor = floor
        self.probe_period_s = probe_period_s
        self.readmit_successes = readmit_successes
        self.history: dict[int, deque] = {ch: deque(maxlen=window) for ch in HOP_SEQUENCE}
        self.blacklisted: set[int] = set()
        self.probe_streak: dict[int, int] = {}
        self._probe_cursor = 0
        self._floor_noted: set[int] = set()
        self.usable: tuple[int, ...] = tuple(HOP_SEQUENCE)
        self.events: list[tuple[float, str, int]] = []

    def _rebuild_usable(self) -> None:
        self.usable = tuple(ch for ch in HOP_SEQUENCE if ch not in self.blacklisted)

    def record(self, channel: int, success: bool, now: float) -> None:
        hist = self.history[channel]
        hist.append(success)
        if not self.enabled or channel in self.blacklisted:
            return
        if len(hist) < self.min_samples:
            return
        rate = sum(hist) / len(hist)
        if rate >= self.threshold:
            self._floor_noted.discard(channel)
            return
        if len(self.usable) > self.floor:
            self.blacklisted.add(channel)
            self.probe_streak[channel] = 0
            hist.clear()
            self._rebuild_usable()
            self.events.append((now, "evict", channel))
        elif channel not in self._floor_noted:
            # Cannot shrink the hop set any further; keep the channel and say so.
            self._floor_noted.add(channel)
            self.events.append((now, "floor-hold", channel))

    def probe_target(self) -> int | None:
        if not self.enabled or not self.blacklisted:
            return None
        order = sorted(self.blacklisted)
        ch = order[self._probe_cursor % len(order)]
        self._probe_cursor += 1
        return ch

    def record_probe(self, channel: int, success: bool, now: float) -> None:
        if channel not in self.blacklisted:
            return
        if success:
            self.probe_streak[channel] += 1
            if self.probe_streak[channel] >= self.readmit_successes:
                self.blacklisted.discard(channel)
                self.probe_streak.pop(channel, None)
                self._rebuild_usable()
                self.events.append((now, "readmit", channel))
        else:
            self.probe_streak[channel] = 0


@dataclass
class MeshNode:
    node_id: str
    neighbors: list[str]
    next_hop: str | None = None
    failover: str | None = None
    node_offset: int = 0
    uplink_queue: deque = field(default_factory=deque)
    forward_queues: dict[str, deque] = field(default_factory=dict)
    consec_failures: int = 0

    def swap_route(self) -> None:
        if self.failover is not None:
            self.next_hop, self.failover = self.failover, self.next_hop
        self.consec_failures = 0


DEFAULT_LINKS = (
    ("GW", "P2"),
    ("GW", "P3"),
    ("P2", "P3"),
    ("P1", "P2"),
    ("P1", "P3"),
    ("T", "P3"),
    ("T", "P2"),
)


class Mesh:
    """The network: nodes, routes, slot schedule and traffic statistics."""

    def __init__(
        self,
        sensor_order: tuple[str, ...],
        links: tuple[tuple[str, str], ...] = DEFAULT_LINKS,
        gateway: str = "GW",
        env: RadioEnvironment | None = None,
        blacklist: ChannelBlacklist | None = None,
        failover_threshold: int = 8,
    ):
        self.gateway = gateway
        self.sensor_order = sensor_order
        self.env = env or RadioEnvironment()
        self.blacklist = blacklist or ChannelBlacklist()
        self.failover_threshold = failover_threshold
        self.nodes = _build_nodes(sensor_order, links, gateway)
        self.lane_of = {sid: i for i, sid in enumerate(sensor_order)}
        self.schedule = _build_schedule(sensor_order, self.nodes, gateway)
        self.packets: list[Packet] = []
        self.attempts: list[tuple[float, int, bool, str]] = []
        self._next_packet_id = 0
        self.on_delivery = None

    def hop_count(self, sensor_id: str) -> int:
        hops, node = 0, sensor_id
        while node != self.gateway:
            node = self.nodes[node].next_hop
            hops += 1
        return hops

    def create_packet(self, origin: str, reading, now: float) -> Packet:
        pkt = Packet(self._next_packet_id, origin, now, reading)
        self._next_packet_id += 1
        self.packets.append(pkt)
        self.nodes[origin].uplink_queue.append(pkt)
        return pkt

    def _attempt(self, sender: MeshNode, pkt: Packet, asn: int, now: float, rng: RngStream) -> bool:
        channel = hop_channel(self.blacklist.usable, asn, sender.node_offset)
        p = self.env.success_prob(channel, now)
        success = rng.uniform() < p
        self.attempts.append((now, channel, success, pkt.origin))
        self.blacklist.record(channel, success, now)
        if success:
            sender.consec_failures = 0
            self._advance_packet(sender, pkt, now)
        else:
            sender.consec_failures += 1
            if sender.consec_failures >= self.failover_threshold:
                sender.swap_route()
        return success

    def _advance_packet(self, sender: MeshNode, pkt: Packet, now: float) -> None:
        dest = sender.next_hop
        if dest == self.gateway:
            pkt.delivered = now + SLOT_S
            if self.on_delivery is not None:
                self.on_delivery(pkt, pkt.delivered)
        else:
            self.nodes[dest].forward_queues.setdefault(pkt.origin, deque()).append(pkt)

    def transmit_slot(self, asn: int, now: float, rng: RngStream, probe_rng: RngStream) -> None:
        slot = asn % FRAME_SLOTS
        action = self.schedule.get(slot)
        if action is None:
            return
        kind, origin = action
        if kind == "probe":
            if (asn // FRAME_SLOTS) % round(self.blacklist.probe_period_s) == 0:
                target = self.blacklist.probe_target()
                if target is not None:
                    ok = probe_rng.uniform() < self.env.success_prob(target, now)
                    self.blacklist.record_probe(target, ok, now)
            return
        if kind == "uplink":
            node = self.nodes[origin]
            if node.uplink_queue:
                # A success always moves the packet off this node, either to
                # the gateway or into a relay's forward queue.
                if self._attempt(node, node.uplink_queue[0], asn, now, rng):
                    node.uplink_queue.popleft()
            return
        # Forward slot: whichever relay holds the oldest packet of this lane
        # transmits it onward.
        holder, queue = None, None
        for nid in self.sensor_order:
            q = self.nodes[nid].forward_queues.get(origin)
            if q and (queue is None or q[0].packet_id < queue[0].packet_id):
                holder, queue = self.nodes[nid], q
        if holder is None:
            return
        if self._attempt(holder, queue[0], asn, now, rng):
            queue.popleft()


def _build_nodes(
    sensor_order: tuple[str, ...],
    links: tuple[tuple[str, str], ...],
    gateway: str,
) -> dict[str, MeshNode]:
    adjacency: dict[str, list[str]] = {gateway: []}
    for sid in sensor_order:
        adjacency[sid] = []
    for a, b in links:
        if a not in adjacency or b not in adjacency:
            raise ConfigurationError(f"link ({a}, {b}) names an unknown node")
        adjacency[a].append(b)
        adjacency[b].append(a)

    for sid in sensor_order:
        if len(adjacency[sid]) < 2:
            raise ConfigurationError(
                f"node {sid} has {len(adjacency[sid])} neighbor(s); mesh resilience needs two"
            )

    # Breadth-first distances from the gateway, then parent/sibling routes.
    dist = {gateway: 0}
    frontier = deque([gateway])
    while frontier:
        cur = frontier.popleft()
        for nxt in adjacency[cur]:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                frontier.append(nxt)
    missing = [sid for sid in sensor_order if sid not in dist]
    if missing:
        raise ConfigurationError(f"no route to gateway from: {missing}")

    nodes = {gateway: MeshNode(gateway, adjacency[gateway])}
    for sid in sensor_order:
        parents = [n for n in adjacency[sid] if dist[n] == dist[sid] - 1]
        siblings = [n for n in adjacency[sid] if dist[n] == dist[sid]]
        candidates = parents + siblings
        primary = candidates[0]
        # Gateway-adjacent lanes have no forward slots, so rerouting them
        # through a peer would strand packets; they retry the direct link.
        failover = None
        if primary != gateway and len(candidates) > 1:
            failover = candidates[1]
        nodes[sid] = MeshNode(sid, adjacency[sid], next_hop=primary, failover=failover)
    return nodes


def _build_schedule(
    sensor_order: tuple[str, ...],
    nodes: dict[str, MeshNode],
    gateway: str,
) -> dict[int, tuple[str, str]]:
    if len(sensor_order) > FRAME_SLOTS // LANE_SLOTS:
        raise ConfigurationError("more sensors than lanes in the superframe")
    schedule: dict[int, tuple[str, str]] = {PROBE_SLOT: ("probe", "")}
    for lane, sid in enumerate(sensor_order):
        base = lane * LANE_SLOTS
        if nodes[sid].next_hop == gateway:
            for off in ATTEMPT_OFFSETS:
                schedule[base + off] = ("uplink", sid)
        else:
            for off in HOP0_OFFSETS:
                schedule[base + off] = ("uplink", sid)
            for off in HOP1_OFFSETS:
                schedule[base + off] = ("forward", sid)
    return schedule


def network_stats(mesh: Mesh, t0: float = -math.inf, t1: float = math.inf) -> dict:
    """Traffic metrics over packets created and attempts made in [t0, t1).

    Latency averages delivery delays of the window's packets wherever the
    delivery lands; it is None when nothing was delivered, never zero.
    """
    created = delivered = 0
    latency_sum = 0.0
    for pkt in mesh.packets:
        if t0 <= pkt.created < t1:
            created += 1
            if pkt.delivered is not None:
                delivered += 1
                latency_sum += pkt.latency
    tried = acked = 0
    for when, _, success, _ in mesh.attempts:
        if t0 <= when < t1:
            tried += 1
            acked += success
    return {
        "packets_created": created,
        "packets_delivered": delivered,
        "reliability_pct": 100.0 * delivered / created if created else 100.0,
        "latency_ms": 1000.0 * latency_sum / delivered if delivered else None,
        "attempts": tried,
        "acked": acked,
        "path_stability_pct": 100.0 * acked / tried if tried else 100.0,
    }
