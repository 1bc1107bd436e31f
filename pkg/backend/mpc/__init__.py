"""Helper-assisted secure three-party computation over XOR-shared bits."""
