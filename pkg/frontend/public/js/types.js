/** Payload types mirroring the annotation service's JSON API. */
export const CATEGORIES = [
    "daytime",
    "precipitation",
    "fog",
    "road",
    "roadside",
    "infrastructure",
];
export const FIELD_VALUES = {
    daytime: ["Day", "Night", "Twilight"],
    precipitation_kind: ["None", "Rain", "Snow"],
    precipitation_intensity: ["Light", "Heavy"],
    fog: ["None", "LightFog", "DenseFog"],
    road: ["Dry", "Wet", "PartialSnow", "FullSnow"],
    roadside: ["Dry", "Wet", "PartialSnow", "FullSnow"],
    infrastructure: ["Urban", "Suburban", "Highway", "Rural"],
};
export const FIELD_LABELS = {
    daytime: "Daytime",
    precipitation_kind: "Precipitation",
    precipitation_intensity: "Intensity",
    fog: "Fog",
    road: "Road condition",
    roadside: "Roadside condition",
    infrastructure: "Infrastructure",
};
