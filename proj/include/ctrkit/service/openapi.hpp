#pragma once

#include <nlohmann/json.hpp>

namespace ctrkit::service {

// OpenAPI description served at GET /spec. Schemas mirror serialization.hpp.
inline const nlohmann::json& openapi_document() {
  static const nlohmann::json doc = nlohmann::json::parse(R"json(
{
  "openapi": "3.0.3",
  "info": {"title": "ctrkit robot service", "version": "1.0.0",
           "description": "Sessions of a simulated concentric tube robot: kinematics, virtual controller and experiments. All lengths in mm, angles in degrees."},
  "paths": {
    "/healthz": {"get": {"summary": "Liveness", "responses": {"200": {"description": "ok"}}}},
    "/spec": {"get": {"summary": "This document", "responses": {"200": {"description": "OpenAPI document"}}}},
    "/robots": {
      "get": {"summary": "List session ids", "responses": {"200": {"description": "{sessions: [id]}"}}},
      "post": {"summary": "Create a session from a robot description",
               "requestBody": {"required": true, "content": {"application/json": {"schema": {"$ref": "#/components/schemas/RobotDescription"}}}},
               "responses": {"201": {"description": "Session", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Session"}}}},
                             "400": {"$ref": "#/components/responses/Invalid"},
                             "422": {"$ref": "#/components/responses/Malformed"}}}
    },
    "/robots/{id}": {
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "get": {"summary": "Full session state", "responses": {"200": {"description": "Session", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Session"}}}}, "404": {"$ref": "#/components/responses/NotFound"}}},
      "delete": {"summary": "Drop the session", "responses": {"200": {"description": "deleted"}, "404": {"$ref": "#/components/responses/NotFound"}}}
    },
    "/robots/{id}/joints": {
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "patch": {"summary": "Set joint targets; sent to the virtual controller as G90 + G1",
                "requestBody": {"required": true, "content": {"application/json": {"schema": {
                  "type": "object",
                  "properties": {"translations": {"type": "array", "items": {"type": "number"}},
                                 "rotations": {"type": "array", "items": {"type": "number"}},
                                 "feed": {"type": "number", "default": 1200}}}}}},
                "responses": {"200": {"description": "Session after the move"},
                              "400": {"$ref": "#/components/responses/Invalid"},
                              "404": {"$ref": "#/components/responses/NotFound"},
                              "409": {"description": "Axis limit violated; state unchanged", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}},
                              "422": {"$ref": "#/components/responses/Malformed"}}}
    },
    "/robots/{id}/fk": {
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "post": {"summary": "Forward kinematics for a query configuration (session unchanged)",
               "requestBody": {"required": true, "content": {"application/json": {"schema": {
                 "oneOf": [{"$ref": "#/components/schemas/JointConfig"},
                           {"type": "object", "properties": {"joints": {"$ref": "#/components/schemas/JointConfig"}}}]}}}},
               "responses": {"200": {"description": "{tip: Pose, links: [Link], link_poses: [Pose]}"},
                             "400": {"$ref": "#/components/responses/Invalid"},
                             "404": {"$ref": "#/components/responses/NotFound"},
                             "422": {"$ref": "#/components/responses/Malformed"}}}
    },
    "/robots/{id}/backbone": {
      "parameters": [{"$ref": "#/components/parameters/id"},
                     {"name": "ds", "in": "query", "schema": {"type": "number", "default": 1.0}}],
      "get": {"summary": "Centerline sampled every ds mm; the tip is the last point",
              "responses": {"200": {"description": "Backbone", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Backbone"}}}}}}
    },
    "/robots/{id}/gcode": {
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "post": {"summary": "Send raw G-code lines to the session's controller; stops at the first rejected line",
               "requestBody": {"content": {"application/json": {"schema": {"type": "object", "properties": {"lines": {"oneOf": [{"type": "string"}, {"type": "array", "items": {"type": "string"}}]}}}},
                                           "text/plain": {"schema": {"type": "string"}}}},
               "responses": {"200": {"description": "{ok, replies: [{line, ok, reply, error}], seq, joints}"}}}
    },
    "/robots/{id}/registration": {
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "get": {"summary": "Current tracker registration", "responses": {"200": {"description": "Registration"}, "409": {"description": "No registration"}}},
      "put": {"summary": "Set the tracker-to-base registration from point pairs or an explicit pose",
              "requestBody": {"content": {"application/json": {"schema": {"oneOf": [
                {"type": "object", "properties": {"pairs": {"type": "array", "items": {"type": "object", "properties": {"tracker": {"$ref": "#/components/schemas/Vec3"}, "base": {"$ref": "#/components/schemas/Vec3"}}}}}},
                {"type": "object", "properties": {"tracker_to_base": {"$ref": "#/components/schemas/Pose"}}}]}}}},
              "responses": {"200": {"description": "Registration"}, "400": {"description": "Degenerate (collinear) points"}}},
      "delete": {"summary": "Clear the registration", "responses": {"200": {"description": "cleared"}}}
    },
    "/robots/{id}/experiments/{kind}": {
      "parameters": [{"$ref": "#/components/parameters/id"},
                     {"name": "kind", "in": "path", "required": true, "schema": {"type": "string", "enum": ["in-plane", "out-of-plane", "accuracy", "tracking"]}}],
      "post": {"summary": "Run an experiment against the session (session joints unless 'joints' is given)",
               "requestBody": {"content": {"application/json": {"schema": {"type": "object", "properties": {
                 "joints": {"$ref": "#/components/schemas/JointConfig"},
                 "delta_rho": {"type": "number", "description": "in-plane: translation of the innermost tube"},
                 "ds": {"type": "number", "description": "in-plane: backbone step for the coplanarity check"},
                 "delta_theta": {"type": "number", "description": "out-of-plane: rotation applied to 'tube'"},
                 "tube": {"type": "integer", "default": 1},
                 "measured": {"type": "array", "items": {"$ref": "#/components/schemas/Vec3"}, "description": "optional base-frame tips, one per prediction"},
                 "measured_tip": {"$ref": "#/components/schemas/Vec3", "description": "tracking: tip in the tracker frame"},
                 "trials": {"type": "integer", "default": 90},
                 "seed": {"type": "integer", "default": 0},
                 "noise": {"type": "object", "properties": {"kind": {"type": "string", "enum": ["none", "gaussian", "fixed_offset"]}, "translation": {"type": "number"}, "rotation": {"type": "number"}}},
                 "sampling": {"type": "string", "enum": ["step_lattice", "continuous"]},
                 "include_trials": {"type": "boolean", "default": true}}}}}},
               "responses": {"200": {"description": "ExperimentRecord or AccuracyReport"},
                             "400": {"$ref": "#/components/responses/Invalid"},
                             "409": {"description": "tracking without a registration"}}}
    },
    "/robots/{id}/stream": {
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "get": {"summary": "WebSocket upgrade. Sends the latest StateEvent on connect, then one per applied command in order. Unknown sessions are closed with code 4404.",
              "responses": {"101": {"description": "Switching protocols"}}}
    }
  },
  "components": {
    "parameters": {"id": {"name": "id", "in": "path", "required": true, "schema": {"type": "string"}}},
    "responses": {
      "Invalid": {"description": "Invalid configuration; message names the violated invariant", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}},
      "Malformed": {"description": "Malformed body", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}},
      "NotFound": {"description": "Unknown session", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}}
    },
    "schemas": {
      "Error": {"type": "object", "properties": {"error": {"type": "string"}, "message": {"type": "string"}}},
      "Vec3": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
      "Pose": {"type": "object", "properties": {"rotation": {"type": "array", "items": {"$ref": "#/components/schemas/Vec3"}}, "translation": {"$ref": "#/components/schemas/Vec3"}}},
      "Tube": {"type": "object", "required": ["youngs_modulus", "outer_diameter", "inner_diameter", "straight_length", "curved_length"],
               "properties": {"id": {"type": "integer"}, "youngs_modulus": {"type": "number", "description": "GPa"}, "outer_diameter": {"type": "number"}, "inner_diameter": {"type": "number"},
                              "second_moment": {"type": "number", "readOnly": true}, "precurvature": {"type": "number"}, "radius": {"type": "number", "writeOnly": true},
                              "straight_length": {"type": "number"}, "curved_length": {"type": "number"}}},
      "Axis": {"type": "object", "properties": {"tube": {"type": "integer"}, "translation": {"type": "string"}, "rotation": {"type": "string"}, "steps_per_mm": {"type": "number"}, "steps_per_degree": {"type": "number"},
                                                "home_offset": {"type": "number"}, "translation_min": {"type": "number"}, "translation_max": {"type": "number"}, "rotation_min": {"type": "number"}, "rotation_max": {"type": "number"}}},
      "JointConfig": {"type": "object", "properties": {"translations": {"type": "array", "items": {"type": "number"}}, "rotations": {"type": "array", "items": {"type": "number"}}}},
      "RobotDescription": {"oneOf": [
        {"type": "object", "properties": {"robot_file": {"type": "string"}}},
        {"type": "object", "properties": {"name": {"type": "string"}, "tubes": {"type": "array", "items": {"$ref": "#/components/schemas/Tube"}},
                                          "axes": {"type": "array", "items": {"$ref": "#/components/schemas/Axis"}}, "joints": {"$ref": "#/components/schemas/JointConfig"}}}]},
      "Link": {"type": "object", "properties": {"start": {"type": "number"}, "arc_length": {"type": "number"}, "curvature": {"type": "number"}, "plane_angle": {"type": "number"},
                                                "absolute_plane_angle": {"type": "number"},
                                                "member_tubes": {"type": "array", "items": {"type": "object", "properties": {"tube": {"type": "integer"}, "section": {"type": "string", "enum": ["straight", "curved"]}}}}}},
      "Backbone": {"type": "object", "properties": {"ds": {"type": "number"}, "points": {"type": "array", "items": {"type": "object", "properties": {"s": {"type": "number"}, "point": {"$ref": "#/components/schemas/Vec3"}}}}}},
      "Session": {"type": "object", "properties": {"id": {"type": "string"}, "name": {"type": "string"}, "seq": {"type": "integer"},
                                                   "tubes": {"type": "array", "items": {"$ref": "#/components/schemas/Tube"}}, "axes": {"type": "array", "items": {"$ref": "#/components/schemas/Axis"}},
                                                   "joint_limits": {"type": "object"}, "joints": {"$ref": "#/components/schemas/JointConfig"},
                                                   "links": {"type": "array", "items": {"$ref": "#/components/schemas/Link"}}, "tip": {"$ref": "#/components/schemas/Pose"},
                                                   "controller": {"type": "object"}, "registration": {"type": "object", "nullable": true}}},
      "StateEvent": {"type": "object", "properties": {"type": {"type": "string", "enum": ["state"]}, "session": {"type": "string"}, "seq": {"type": "integer"},
                                                      "joints": {"$ref": "#/components/schemas/JointConfig"}, "links": {"type": "array", "items": {"$ref": "#/components/schemas/Link"}},
                                                      "tip": {"$ref": "#/components/schemas/Pose"}, "backbone": {"$ref": "#/components/schemas/Backbone"}}}
    }
  }
}
)json");
  return doc;
}

}  // namespace ctrkit::service
