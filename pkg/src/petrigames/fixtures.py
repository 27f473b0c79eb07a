"""Built-in example nets used by the test suite, the README and the CLI docs."""

#: Single user racing an environment toggle; two concurrent components.
FIG4 = """\
net F4
locations env u
place p0 @env init
place p1 @env
place p2 @u init
place p3 @env
place p4 @env
trans t0 @env pre p0 post p1
trans t1 @env pre p1 post p0
trans t2 @u pre p2 post p4
trans t3 @u pre p2 post p3
trans t4 @env pre p4 post p2
trans t5 @env pre p3 post p2
"""

#: Two independent environment toggles (product of two 2-cycles).
TOGGLE2 = """\
net toggle2
locations env
place p0 @env init
place p1 @env
place q0 @env init
place q1 @env
trans a01 @env pre p0 post p1
trans a10 @env pre p1 post p0
trans b01 @env pre q0 post q1
trans b10 @env pre q1 post q0
"""

#: No transitions at all: a single deadlocked state.
DEADLOCK = """\
net deadlock
locations env u
place p0 @env init
place p1 @u
"""

#: Not contact-free: t is pre-enabled while its post-set is marked.
CONTACT = """\
net contact
locations env
place p0 @env init
place p1 @env init
trans t @env pre p0 post p0 p1
"""

#: Every non-deadlock marking enables only user transitions.
USERONLY = """\
net useronly
locations env u
place a @u init
place b @u
place c @u
trans s @u pre a post b
trans r @u pre b post c
"""

#: Two users plus an environment; users must cooperate to mark ga and gb.
COOP2 = """\
net coop2
locations env u1 u2
place a @u1 init
place b @u2 init
place ga @env
place gb @env
trans s1 @u1 pre a post ga
trans s2 @u2 pre b post gb
trans back @env pre ga gb post a b
"""
