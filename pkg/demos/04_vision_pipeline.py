"""Vision walkthrough: render a synthetic scene through the fisheye camera,
classify it with the color LUT, and run every detector. Writes the camera
frame and a class overlay next to this script."""

import math
from pathlib import Path

import numpy as np

from soccerbot.http_view import OVERLAY_RGB
from soccerbot.ppm import write_ppm
from soccerbot.runtime.render import CameraRenderer
from soccerbot.runtime.world import WorldState
from soccerbot.vision.classify import pack_yuyv, yuv_to_rgb
from soccerbot.vision.lut import reference_lut
from soccerbot.vision.pipeline import CameraPose, VisionPipeline

world = WorldState()
world.teleport(-1.0, 0.3, 0.0)
world.set_ball(0.8, 0.1)
# an auxiliary X mark painted on the turf ahead
world.extra_marks = [(-0.2, -1.2, 1.0, -0.4, 0.1), (0.0, -0.3, 0.8, -1.3, 0.1)]

renderer = CameraRenderer()
view = renderer.view_for(world, neck_yaw=0.0, neck_pitch=0.0,
                         cam_height=0.85, cam_tilt=0.35)
planes = renderer.render_planes(world, view)
frame = pack_yuyv(*planes)

pipe = VisionPipeline(reference_lut())
det = pipe.process(frame, CameraPose())

print("detections:")
if det.ball:
    print(f"  ball at pixel {tuple(round(p) for p in det.ball.pixel)}, "
          f"bearing {math.degrees(det.ball.azimuth):.1f} deg, "
          f"elevation {math.degrees(det.ball.elevation):.1f} deg")
    camera_height = 0.85
    print(f"  -> ground distance {camera_height / math.tan(-det.ball.elevation):.2f} m "
          f"(truth {np.hypot(*(world.ball_pos - world.pose[:2])):.2f} m)")
print(f"  goal posts: {len(det.goal_posts)}")
for post in det.goal_posts:
    print(f"    bearing {math.degrees(post.azimuth):6.1f} deg")
print(f"  line segments: {len(det.line_segments)}")
print(f"  crossings: {[(c.kind, tuple(round(x) for x in c.cell)) for c in det.crossings]}")
print(f"  boundary rows (every 25th col): {list(det.field_boundary[::25])}")

here = Path(__file__).parent
write_ppm(here / "scene_camera.ppm", yuv_to_rgb(np.stack(planes, axis=-1)))
overlay = OVERLAY_RGB[pipe.last_counts.argmax(axis=0)].repeat(4, 0).repeat(4, 1)
write_ppm(here / "scene_classes.ppm", overlay)
print(f"\nwrote {here / 'scene_camera.ppm'} and {here / 'scene_classes.ppm'}")
