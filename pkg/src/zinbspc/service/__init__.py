"""HTTP service and the request handlers behind it."""
