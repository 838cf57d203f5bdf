"""
Actions package for the noisy group testing toolkit.

Each module holds the row generator the CLI streams from and one async
function ending in _action. The actions are auto-discovered and registered
as MCP tools when the server starts.

Available actions:
- capacity_action  → capacity_tool
- bounds_action    → bounds_tool
- compare_action   → compare_tool
- sweep_action     → sweep_tool
- simulate_action  → simulate_tool
- status_action    → status_tool
"""
