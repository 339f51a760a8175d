from flask import Flask, jsonify, request, Blueprint
from flask_cors import CORS
from flask_restx import Api, Resource, fields, Namespace
from werkzeug.exceptions import HTTPException
import logging

from memsched.checker import check_schedule
from memsched.config import API_PORT, configure_logging, parse_scheduler_config
from memsched.errors import MemschedError
from memsched.explore import explore
from memsched.mcg import build_mcg, dump_mcg
from memsched.memory_model import memory_table_template, parse_memory_map, require_coverage
from memsched.report import dump_schedule, parse_schedule_dump, render_gantt
from memsched.scheduler import schedule
from memsched.sfg_core import extract_memory_table, parse_sfg

# Configure logging at the application startup
configure_logging()
logger = logging.getLogger(__name__)

##### Configuration #####
API_VERSION = 'v1'
API_ROOT = f'/api/{API_VERSION}/memsched'

app = Flask(__name__)

# Configure CORS
CORS(app, resources={
    r"/api/*": {
        "origins": "*",
        "methods": ["GET", "POST", "OPTIONS"],
        "allow_headers": ["Content-Type", "X-Requested-With"],
        "max_age": 3600
    }
})

blueprint = Blueprint('api', __name__, url_prefix=API_ROOT)
api = Api(blueprint, version=API_VERSION, title='Memsched API',
          description='Memory-aware scheduling of signal flow graphs')
app.register_blueprint(blueprint)

# Custom error handler for more informative 500 errors
@app.errorhandler(Exception)
def handle_exception(e):
    if isinstance(e, HTTPException):
        return jsonify({'error': e.description}), e.code
    logger.exception("Unhandled error")
    return jsonify({'error': str(e)}), 500

##### Namespaces #####
sfg_ns = Namespace('sfg', description='Graph inspection: memory table and conflict graphs')
schedule_ns = Namespace('schedule', description='Scheduling and verification')
explore_ns = Namespace('explore', description='Memory architecture exploration')

##### API Models - flask restx API autodoc #####
sfg_input_model = sfg_ns.model('SfgInput', {
    'sfg': fields.String(required=True, description='SFG file contents',
                example='sfg add\nnode a kind=data symbol=A access=read\n...'),
})

table_row_model = sfg_ns.model('MemoryTableRow', {
    'symbol': fields.String(example='A'),
    'accesses': fields.Integer(example=2),
    'reads': fields.Integer(example=2),
    'writes': fields.Integer(example=0),
})

table_response = sfg_ns.model('MemoryTableResponse', {
    'rows': fields.List(fields.Nested(table_row_model)),
    'template': fields.String(description='Mapping file skeleton for the designer to complete'),
})

mcg_input_model = sfg_ns.model('McgInput', {
    'sfg': fields.String(required=True, description='SFG file contents'),
    'map': fields.String(required=True, description='Memory mapping file contents'),
})

mcg_response = sfg_ns.model('McgResponse', {
    'edges': fields.List(fields.String, example=['B0: a -- b w=2']),
})

schedule_input_model = schedule_ns.model('ScheduleInput', {
    'sfg': fields.String(required=True, description='SFG file contents'),
    'map': fields.String(required=True, description='Memory mapping file contents'),
    'config': fields.String(required=True, description='Scheduler config contents', example='horizon=4'),
})

schedule_response = schedule_ns.model('ScheduleResponse', {
    'latency': fields.Integer(example=4),
    'dump': fields.String(description='Schedule dump'),
    'gantt': fields.String(description='Text Gantt chart'),
})

verify_input_model = schedule_ns.inherit('VerifyInput', schedule_input_model, {
    'schedule': fields.String(required=True, description='Schedule dump to verify'),
})

verdict_response = schedule_ns.model('VerdictResponse', {
    'ok': fields.Boolean(example=False),
    'verdict': fields.String(example='FAIL port-capacity cycle=0 vertices=a,b'),
})

explore_input_model = explore_ns.model('ExploreInput', {
    'sfg': fields.String(required=True, description='SFG file contents'),
    'maps': fields.Raw(required=True, description='Candidate maps, label -> file contents',
                example={'one_bank': 'bank B0 ...', 'two_banks': 'bank B0 ...'}),
    'horizons': fields.List(fields.Integer, required=True, example=[12, 16]),
    'config': fields.String(required=False, description='Operator latencies and unit limits'),
})

explore_row_model = explore_ns.model('ExplorationRow', {
    'label': fields.String(example='two_banks'),
    'horizon': fields.Integer(example=12),
    'banks': fields.Integer(example=2),
    'ports': fields.Integer(example=2),
    'latency': fields.Integer(example=10),
    'area': fields.Integer(example=2),
    'unaware_latency': fields.Integer(example=7),
    'feasible': fields.Boolean(example=True),
    'reason': fields.String(example=''),
})

explore_response = explore_ns.model('ExploreResponse', {
    'rows': fields.List(fields.Nested(explore_row_model)),
})

#### - HELPER FUNCTIONS - ####

def require_fields(ns, data, *names):
    missing = [name for name in names if not data.get(name)]
    if missing:
        ns.abort(400, f"Missing required fields: {', '.join(missing)}")


def load_inputs(data):
    graph = parse_sfg(data['sfg'], source='sfg')
    memory_map = parse_memory_map(data['map'], source='map')
    cfg = parse_scheduler_config(data['config'], source='config')
    return graph, memory_map, cfg

##### API actions #####

@sfg_ns.route("/table")
class MemoryTable(Resource):
    @sfg_ns.expect(sfg_input_model)
    @sfg_ns.marshal_with(table_response)
    def post(self):
        """Memory table of a graph plus a mapping file skeleton"""
        data = request.json or {}
        require_fields(sfg_ns, data, 'sfg')
        try:
            graph = parse_sfg(data['sfg'], source='sfg')
        except MemschedError as e:
            sfg_ns.abort(400, str(e))
        rows = extract_memory_table(graph)
        return {'rows': [vars(row) for row in rows], 'template': memory_table_template(rows, graph.name)}


@sfg_ns.route("/mcg")
class ConflictGraphs(Resource):
    @sfg_ns.expect(mcg_input_model)
    @sfg_ns.marshal_with(mcg_response)
    def post(self):
        """Memory constraint graph edges, one line per edge"""
        data = request.json or {}
        require_fields(sfg_ns, data, 'sfg', 'map')
        try:
            graph = parse_sfg(data['sfg'], source='sfg')
            memory_map = parse_memory_map(data['map'], source='map')
            require_coverage(memory_map, graph)
        except MemschedError as e:
            sfg_ns.abort(400, str(e))
        return {'edges': dump_mcg(build_mcg(graph, memory_map)).splitlines()}


@schedule_ns.route("/")
class ScheduleRun(Resource):
    @schedule_ns.expect(schedule_input_model)
    @schedule_ns.response(200, "Schedule found", schedule_response)
    @schedule_ns.response(400, "Parse error or infeasible")
    def post(self):
        """Run the memory-aware list scheduler"""
        data = request.json or {}
        require_fields(schedule_ns, data, 'sfg', 'map', 'config')
        try:
            graph, memory_map, cfg = load_inputs(data)
            result = schedule(graph, memory_map, cfg)
        except MemschedError as e:
            logger.info(f"Schedule request rejected: {e}")
            schedule_ns.abort(400, str(e))
        return {
            'latency': result.achieved_latency,
            'dump': dump_schedule(result),
            'gantt': render_gantt(result, memory_map, cfg),
        }, 200


@schedule_ns.route("/verify")
class Verify(Resource):
    @schedule_ns.expect(verify_input_model)
    @schedule_ns.marshal_with(verdict_response)
    def post(self):
        """Check a schedule dump against its graph, map and config"""
        data = request.json or {}
        require_fields(schedule_ns, data, 'sfg', 'map', 'config', 'schedule')
        try:
            graph, memory_map, cfg = load_inputs(data)
            dump = parse_schedule_dump(data['schedule'], source='schedule')
        except MemschedError as e:
            schedule_ns.abort(400, str(e))
        verdict = check_schedule(graph, memory_map, cfg, dump)
        return {'ok': verdict.ok, 'verdict': str(verdict)}


@explore_ns.route("/")
class Explore(Resource):
    @explore_ns.expect(explore_input_model)
    @explore_ns.marshal_with(explore_response)
    def post(self):
        """Schedule every (map, horizon) pair and rank them by latency then area"""
        data = request.json or {}
        require_fields(explore_ns, data, 'sfg', 'maps', 'horizons')
        horizons = data['horizons']
        valid_horizons = isinstance(horizons, list) and horizons and all(
            isinstance(h, int) and not isinstance(h, bool) and h >= 1 for h in horizons)
        if not isinstance(data['maps'], dict) or not valid_horizons:
            explore_ns.abort(400, "maps must be an object and horizons a non-empty list of positive integers")
        try:
            graph = parse_sfg(data['sfg'], source='sfg')
            base_cfg = None
            if data.get('config'):
                base_cfg = parse_scheduler_config(data['config'], source='config', horizon=max(horizons))
            candidates = []
            for label in sorted(data['maps']):
                try:
                    candidates.append((label, parse_memory_map(data['maps'][label], source=label)))
                except MemschedError as e:
                    candidates.append((label, e))
            report = explore(graph, candidates, horizons, base_cfg)
        except MemschedError as e:
            explore_ns.abort(400, str(e))
        return {'rows': [vars(row) for row in report.rows]}

# Add name spaces into api
api.add_namespace(sfg_ns)
api.add_namespace(schedule_ns)
api.add_namespace(explore_ns)

if __name__ == '__main__':
    app.run(host='0.0.0.0', port=API_PORT, debug=True)
