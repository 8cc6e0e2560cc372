"""Path reconstruction attack on usage-based-insurance telematics.

Given a road graph with popularity weights, a trip's starting intersection,
its cornering log, average speed and total driving time, enumerate and rank
the routes the driver could have taken.
"""

__version__ = "0.1.0"
