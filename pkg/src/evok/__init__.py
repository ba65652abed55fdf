"""Heart-rate sharing over a lossy link.

Subpackages and modules:
    ppg       -- synthetic pulse waveforms, beat detection, rate estimation
    protocol  -- the 26-byte wire frame (encode/decode/accepts)
    sender    -- the headband daemon: source -> estimate -> frames
    receiver  -- the wristwatch daemon: frames -> zones/alerts -> UI bridge
    linksim   -- lossy-link simulator and UDP impairment proxy
"""

__version__ = "0.1.0"
