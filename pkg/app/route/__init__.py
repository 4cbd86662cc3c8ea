from app.route.route import create_cli, parse_and_dispatch
