import pytz
from datetime import datetime

def get_date() -> str:
    """
        Get the current UTC date and time as an ISO-8601 string.

        ### Description
        Used only for the `timestamp` field of output envelopes; it is the one
        field excluded when comparing two runs for byte identity.
    """
    return datetime.now(pytz.UTC).replace(microsecond=0).isoformat()
